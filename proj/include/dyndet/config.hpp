#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dyndet/bowen.hpp"
#include "dyndet/frames.hpp"
#include "dyndet/model.hpp"
#include "dyndet/single_orbit.hpp"

namespace dyndet {

struct GridSpec {
    double re_lo = 1.0;
    double re_hi = 4.0;
    double im_lo = -3.0;
    double im_hi = 3.0;
    int re_count = 4;
    int im_count = 7;

    std::vector<cd> points() const;  // row-major in Re, then Im
};

struct RunConfig {
    std::optional<FlowSystem> system;
    int orbit_cap = 0;  // 0: default cap
    int threads = 0;

    struct {
        int m = 4;
    } orbits;
    struct {
        int m = 4;
        cd z = 0.0;
    } traces;
    struct {
        GridSpec grid;
        int M = 25;
    } det;
    struct {
        double r = 1.0;
        int M = 25;
    } resonances;
    struct {
        std::optional<OrbitSpectrum> spectrum;
        double r = 10.0;
    } single_orbit;
    struct {
        std::vector<std::pair<SymbolSet, int>> oracle;
        bool singleton = true;  // no table given
    } bowen;
    struct {
        FrameParams params;
        double epsilon = 0.25;
        std::vector<cd> z = {cd(4.0, 0.0)};
        std::vector<int> sweep;  // empty: use params.L only
        double dynamic_range = 1e-2;
    } frame;
    struct {
        std::vector<double> radii = {5, 10, 15, 20, 25, 30};
        std::string source = "auto";
        int M = 25;
    } count;
    struct {
        std::vector<double> radii = {5, 10, 15, 20, 25, 30};
        std::string source = "auto";
        int M = 25;
    } growth;
    struct {
        std::string csv;   // empty: standard output
        std::string json;  // empty: standard output
    } output;
};

/// Parses a run config. Unknown keys, malformed values and non-positive
/// parameters raise ValidationError naming the key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// System block only (same schema).
FlowSystem parse_system(const std::string& text);

}  // namespace dyndet
