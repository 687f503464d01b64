#include "dyndet/cli.hpp"

int main(int argc, char** argv) { return dyndet::run(argc, argv); }
