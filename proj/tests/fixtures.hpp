#pragma once

#include <random>

#include "dyndet/model.hpp"

namespace fixtures {

using namespace dyndet;

inline EdgeMap diagonal_edge(double lam, double mu, double t0 = 1.0, cd lift = 1.0) {
    EdgeMap e;
    e.linear = Mat::Zero(2, 2);
    e.linear(0, 0) = lam;
    e.linear(1, 1) = mu;
    e.offset = Vec::Zero(2);
    e.roof.t0 = t0;
    e.roof.c = Vec::Zero(2);
    e.lift = CMat::Constant(1, 1, lift);
    return e;
}

/// Full shift on two symbols, Lambda = diag(2, 1/2), tau = 1, B = [1].
inline FlowSystem two_shift() {
    return make_uniform_system(Eigen::MatrixXi::Ones(2, 2), diagonal_edge(2.0, 0.5), 1, 1, 2.0);
}

/// One symbol with a self-loop: a basic set made of one periodic orbit.
inline FlowSystem single_loop(double lam = 2.0, double mu = 0.5, double t0 = 1.0) {
    return make_uniform_system(Eigen::MatrixXi::Ones(1, 1), diagonal_edge(lam, mu, t0), 1, 1, 2.0);
}

/// Random valid system: expanding coordinate first, positive affine roof at the
/// orbit points guaranteed by a small gradient and bounded offsets.
inline FlowSystem random_system(std::mt19937_64& rng, int symbols, int d = 1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    FlowSystem sys;
    for (int i = 0; i < symbols; ++i) sys.graph.symbols.push_back(std::to_string(i));
    sys.graph.adjacency = Eigen::MatrixXi::Ones(symbols, symbols);
    for (int i = 0; i < symbols; ++i)
        for (int j = 0; j < symbols; ++j)
            if (i != j && u(rng) < 0.3) sys.graph.adjacency(i, j) = 0;
    sys.section_dim = 2;
    sys.bundle_dim = d;
    sys.gevrey_s = 2.0;
    sys.d_u = 1;
    sys.d_s = 1;
    for (int i = 0; i < symbols; ++i)
        for (int j = 0; j < symbols; ++j) {
            if (!sys.graph.admissible(i, j)) continue;
            EdgeMap e;
            e.linear = Mat::Zero(2, 2);
            e.linear(0, 0) = (u(rng) < 0.5 ? -1.0 : 1.0) * (1.5 + 2.0 * u(rng));
            e.linear(1, 1) = (u(rng) < 0.5 ? -1.0 : 1.0) * (0.1 + 0.6 * u(rng));
            e.offset = Vec(2);
            e.offset << u(rng) - 0.5, u(rng) - 0.5;
            e.roof.t0 = 1.0 + u(rng);
            e.roof.c = Vec(2);
            e.roof.c << 0.05 * (u(rng) - 0.5), 0.05 * (u(rng) - 0.5);
            e.lift = CMat::Random(d, d) * 0.5 + CMat::Identity(d, d);
            sys.edges[{i, j}] = e;
        }
    return sys;
}

}  // namespace fixtures
