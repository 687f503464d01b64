#include "dyndet/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "dyndet/errors.hpp"

namespace dyndet {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ValidationError("cli", "parse_config", path, what);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) bad(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) bad(path + "." + it.key(), "unknown key");
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) bad(path, "expected a number");
    return j.get<double>();
}

double positive(const json& j, const std::string& path) {
    const double v = num(j, path);
    if (!(v > 0.0)) bad(path, "must be positive");
    return v;
}

int integer(const json& j, const std::string& path) {
    if (!j.is_number_integer()) bad(path, "expected an integer");
    return j.get<int>();
}

int positive_int(const json& j, const std::string& path) {
    const int v = integer(j, path);
    if (v <= 0) bad(path, "must be a positive integer");
    return v;
}

std::string str(const json& j, const std::string& path) {
    if (!j.is_string()) bad(path, "expected a string");
    return j.get<std::string>();
}

cd complex_value(const json& j, const std::string& path) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    bad(path, "expected a number or an [re, im] pair");
}

std::vector<double> num_list(const json& j, const std::string& path) {
    if (!j.is_array()) bad(path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<cd> complex_list(const json& j, const std::string& path) {
    if (!j.is_array()) bad(path, "expected a list");
    std::vector<cd> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex_value(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

Vec vector_of(const json& j, int size, const std::string& path) {
    const auto v = num_list(j, path);
    if (static_cast<int>(v.size()) != size) bad(path, "expected " + std::to_string(size) + " entries");
    return Eigen::Map<const Vec>(v.data(), size);
}

/// Nested rows or a flat row-major list.
Mat real_matrix(const json& j, int rows, int cols, const std::string& path) {
    if (!j.is_array()) bad(path, "expected a matrix");
    Mat m(rows, cols);
    if (j.size() == static_cast<std::size_t>(rows) && (rows == 0 || j[0].is_array())) {
        for (int r = 0; r < rows; ++r) m.row(r) = vector_of(j[static_cast<std::size_t>(r)], cols,
                                                           path + "[" + std::to_string(r) + "]");
        return m;
    }
    const auto flat = num_list(j, path);
    if (static_cast<int>(flat.size()) != rows * cols)
        bad(path, "expected " + std::to_string(rows) + "x" + std::to_string(cols) + " entries");
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    return m;
}

CMat complex_matrix(const json& j, int size, const std::string& path) {
    if (!j.is_array() || j.size() != static_cast<std::size_t>(size)) bad(path, "expected " + std::to_string(size) + " rows");
    CMat m(size, size);
    for (int r = 0; r < size; ++r) {
        const auto row = complex_list(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
        if (static_cast<int>(row.size()) != size) bad(path, "row length must be " + std::to_string(size));
        for (int c = 0; c < size; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

int symbol_ref(const json& j, const TransitionGraph& g, const std::string& path) {
    if (j.is_string()) {
        const int i = g.index_of(j.get<std::string>());
        if (i < 0) bad(path, "unknown symbol '" + j.get<std::string>() + "'");
        return i;
    }
    if (j.is_number_integer()) {
        const int i = j.get<int>();
        if (i < 0 || i >= g.size()) bad(path, "symbol index out of range");
        return i;
    }
    bad(path, "expected a symbol name or index");
}

const std::set<std::string> kEdgeKeys = {"from", "to", "linear", "offset", "roof", "lift"};

/// Fills `e` from the fields present in `j`, starting from `e`.
void read_edge_fields(const json& j, EdgeMap& e, int k, int d, const std::string& path) {
    if (j.contains("linear")) e.linear = real_matrix(j["linear"], k, k, path + ".linear");
    if (j.contains("offset")) e.offset = vector_of(j["offset"], k, path + ".offset");
    if (j.contains("roof")) {
        const json& r = j["roof"];
        check_keys(r, path + ".roof", {"t0", "c"});
        if (r.contains("t0")) e.roof.t0 = num(r["t0"], path + ".roof.t0");
        if (r.contains("c")) e.roof.c = vector_of(r["c"], k, path + ".roof.c");
    }
    if (j.contains("lift")) e.lift = complex_matrix(j["lift"], d, path + ".lift");
}

const std::set<std::string> kSystemKeys = {"symbols", "adjacency", "n", "d", "s", "split", "edges", "edge_default"};

FlowSystem read_system(const json& j) {
    for (const char* key : {"symbols", "adjacency", "n", "d", "s", "split"})
        if (!j.contains(key)) bad(key, "missing system key");
    FlowSystem sys;
    const json& syms = j["symbols"];
    if (!syms.is_array() || syms.empty()) bad("symbols", "expected a nonempty list");
    for (std::size_t i = 0; i < syms.size(); ++i) {
        if (syms[i].is_string()) sys.graph.symbols.push_back(syms[i].get<std::string>());
        else if (syms[i].is_number_integer()) sys.graph.symbols.push_back(std::to_string(syms[i].get<int>()));
        else bad("symbols[" + std::to_string(i) + "]", "expected a string");
    }
    if (std::set<std::string>(sys.graph.symbols.begin(), sys.graph.symbols.end()).size() != syms.size())
        bad("symbols", "duplicate symbol");
    const int ns = sys.graph.size();
    const Mat a = real_matrix(j["adjacency"], ns, ns, "adjacency");
    sys.graph.adjacency = Eigen::MatrixXi(ns, ns);
    for (int r = 0; r < ns; ++r)
        for (int c = 0; c < ns; ++c) {
            if (a(r, c) != 0.0 && a(r, c) != 1.0) bad("adjacency", "entries must be 0 or 1");
            sys.graph.adjacency(r, c) = static_cast<int>(a(r, c));
        }
    const int n = positive_int(j["n"], "n");
    if (n < 2) bad("n", "must be at least 2");
    sys.section_dim = n - 1;
    sys.bundle_dim = positive_int(j["d"], "d");
    sys.gevrey_s = num(j["s"], "s");
    const json& split = j["split"];
    if (!split.is_array() || split.size() != 2) bad("split", "expected [d_u, d_s]");
    sys.d_u = integer(split[0], "split[0]");
    sys.d_s = integer(split[1], "split[1]");
    if (sys.d_u < 0 || sys.d_s < 0 || sys.d_u + sys.d_s != sys.section_dim) bad("split", "d_u + d_s must equal n - 1");

    const int k = sys.section_dim;
    const int d = sys.bundle_dim;
    EdgeMap base;
    base.linear = Mat::Zero(k, k);
    base.offset = Vec::Zero(k);
    base.roof.c = Vec::Zero(k);
    base.lift = CMat::Identity(d, d);
    bool have_default = false;
    if (j.contains("edge_default")) {
        check_keys(j["edge_default"], "edge_default", {"linear", "offset", "roof", "lift"});
        if (!j["edge_default"].contains("linear")) bad("edge_default.linear", "missing");
        read_edge_fields(j["edge_default"], base, k, d, "edge_default");
        have_default = true;
    }
    std::map<std::pair<int, int>, EdgeMap> listed;
    if (j.contains("edges")) {
        const json& edges = j["edges"];
        if (!edges.is_array()) bad("edges", "expected a list");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const std::string path = "edges[" + std::to_string(i) + "]";
            check_keys(edges[i], path, kEdgeKeys);
            if (!edges[i].contains("from") || !edges[i].contains("to")) bad(path, "missing from/to");
            const int from = symbol_ref(edges[i]["from"], sys.graph, path + ".from");
            const int to = symbol_ref(edges[i]["to"], sys.graph, path + ".to");
            if (!have_default && !edges[i].contains("linear")) bad(path + ".linear", "missing");
            EdgeMap e = base;
            read_edge_fields(edges[i], e, k, d, path);
            if (!listed.emplace(std::make_pair(from, to), e).second) bad(path, "duplicate edge");
        }
    }
    for (const auto& [key, e] : listed) sys.edges[key] = e;
    if (have_default)
        for (int r = 0; r < ns; ++r)
            for (int c = 0; c < ns; ++c)
                if (sys.graph.adjacency(r, c) == 1 && !sys.edges.count({r, c})) sys.edges[{r, c}] = base;
    return sys;
}

OrbitSpectrum read_spectrum(const json& j, const std::string& path) {
    OrbitSpectrum s;
    if (j.contains("t0")) s.t0 = positive(j["t0"], path + ".t0");
    if (j.contains("lambdas")) s.lambdas = complex_list(j["lambdas"], path + ".lambdas");
    if (j.contains("mus")) s.mus = complex_list(j["mus"], path + ".mus");
    if (j.contains("q_minus")) s.q_minus = integer(j["q_minus"], path + ".q_minus");
    if (j.contains("zetas")) s.zetas = complex_list(j["zetas"], path + ".zetas");
    else s.zetas = {1.0};
    return s;
}

std::vector<double> radii_list(const json& j, const std::string& path) {
    auto r = num_list(j, path);
    if (r.empty()) bad(path, "empty");
    for (double v : r)
        if (!(v > 0.0)) bad(path, "radii must be positive");
    return r;
}

std::string source_name(const json& j, const std::string& path) {
    const std::string s = str(j, path);
    if (s != "auto" && s != "closed_form" && s != "single_orbit" && s != "det")
        bad(path, "expected auto, closed_form, single_orbit or det");
    return s;
}

std::pair<double, double> range(const json& j, const std::string& path) {
    const auto v = num_list(j, path);
    if (v.size() != 2 || v[0] > v[1]) bad(path, "expected [lo, hi] with lo <= hi");
    return {v[0], v[1]};
}

}  // namespace

std::vector<cd> GridSpec::points() const {
    std::vector<cd> out;
    for (int i = 0; i < re_count; ++i) {
        const double re = re_count == 1 ? re_lo : re_lo + (re_hi - re_lo) * i / (re_count - 1);
        for (int k = 0; k < im_count; ++k) {
            const double im = im_count == 1 ? im_lo : im_lo + (im_hi - im_lo) * k / (im_count - 1);
            out.emplace_back(re, im);
        }
    }
    return out;
}

FlowSystem parse_system(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad("<document>", e.what());
    }
    check_keys(j, "<system>", kSystemKeys);
    return read_system(j);
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        bad("<document>", e.what());
    }
    std::set<std::string> allowed = kSystemKeys;
    for (const char* key : {"orbit_cap", "threads", "orbits", "traces", "det", "resonances", "single_orbit", "bowen",
                            "frame", "count", "growth", "output"})
        allowed.insert(key);
    check_keys(j, "<config>", allowed);

    RunConfig cfg;
    bool any_system = false;
    for (const auto& key : kSystemKeys) any_system = any_system || j.contains(key);
    if (any_system) cfg.system = read_system(j);

    if (j.contains("orbit_cap")) cfg.orbit_cap = positive_int(j["orbit_cap"], "orbit_cap");
    if (j.contains("threads")) {
        cfg.threads = integer(j["threads"], "threads");
        if (cfg.threads < 0) bad("threads", "must be nonnegative");
    }
    if (j.contains("orbits")) {
        check_keys(j["orbits"], "orbits", {"m"});
        if (j["orbits"].contains("m")) cfg.orbits.m = positive_int(j["orbits"]["m"], "orbits.m");
    }
    if (j.contains("traces")) {
        const json& t = j["traces"];
        check_keys(t, "traces", {"m", "z"});
        if (t.contains("m")) cfg.traces.m = positive_int(t["m"], "traces.m");
        if (t.contains("z")) cfg.traces.z = complex_value(t["z"], "traces.z");
    }
    if (j.contains("det")) {
        const json& t = j["det"];
        check_keys(t, "det", {"re", "im", "counts", "M"});
        if (t.contains("re")) std::tie(cfg.det.grid.re_lo, cfg.det.grid.re_hi) = range(t["re"], "det.re");
        if (t.contains("im")) std::tie(cfg.det.grid.im_lo, cfg.det.grid.im_hi) = range(t["im"], "det.im");
        if (t.contains("counts")) {
            const json& c = t["counts"];
            if (!c.is_array() || c.size() != 2) bad("det.counts", "expected [re_count, im_count]");
            cfg.det.grid.re_count = positive_int(c[0], "det.counts[0]");
            cfg.det.grid.im_count = positive_int(c[1], "det.counts[1]");
        }
        if (t.contains("M")) cfg.det.M = positive_int(t["M"], "det.M");
    }
    if (j.contains("resonances")) {
        const json& t = j["resonances"];
        check_keys(t, "resonances", {"r", "M"});
        if (t.contains("r")) cfg.resonances.r = positive(t["r"], "resonances.r");
        if (t.contains("M")) cfg.resonances.M = positive_int(t["M"], "resonances.M");
    }
    if (j.contains("single_orbit")) {
        const json& t = j["single_orbit"];
        check_keys(t, "single_orbit", {"t0", "lambdas", "mus", "q_minus", "zetas", "r"});
        if (t.contains("r")) cfg.single_orbit.r = positive(t["r"], "single_orbit.r");
        if (t.contains("lambdas") || t.contains("mus") || t.contains("t0"))
            cfg.single_orbit.spectrum = read_spectrum(t, "single_orbit");
    }
    if (j.contains("bowen")) {
        const json& t = j["bowen"];
        check_keys(t, "bowen", {"oracle"});
        if (t.contains("oracle")) {
            if (!cfg.system) bad("bowen.oracle", "requires a system definition");
            const json& o = t["oracle"];
            if (!o.is_array()) bad("bowen.oracle", "expected a list of [subset, symbol] pairs");
            for (std::size_t i = 0; i < o.size(); ++i) {
                const std::string path = "bowen.oracle[" + std::to_string(i) + "]";
                if (!o[i].is_array() || o[i].size() != 2 || !o[i][0].is_array()) bad(path, "expected [subset, symbol]");
                SymbolSet set = 0;
                for (const auto& s : o[i][0]) set |= singleton(symbol_ref(s, cfg.system->graph, path));
                const int sym = symbol_ref(o[i][1], cfg.system->graph, path);
                if (!(set & singleton(sym))) bad(path, "symbol must belong to the subset");
                cfg.bowen.oracle.emplace_back(set, sym);
            }
            cfg.bowen.singleton = false;
        }
    }
    if (j.contains("frame")) {
        const json& t = j["frame"];
        check_keys(t, "frame", {"L", "epsilon", "delta", "varpi", "r_theta", "omega_width", "box", "z", "sweep",
                                "row_norm_bound", "quad_nodes", "quad_tol", "window_scale", "dynamic_range"});
        auto& p = cfg.frame.params;
        if (t.contains("L")) {
            p.L = integer(t["L"], "frame.L");
            if (p.L < 0) bad("frame.L", "must be nonnegative");
        }
        if (t.contains("epsilon")) {
            cfg.frame.epsilon = num(t["epsilon"], "frame.epsilon");
            if (cfg.frame.epsilon < 0.0) bad("frame.epsilon", "must be nonnegative");
        }
        if (t.contains("delta")) p.delta = positive(t["delta"], "frame.delta");
        if (t.contains("varpi")) p.varpi = positive(t["varpi"], "frame.varpi");
        if (t.contains("r_theta")) p.r_theta = positive(t["r_theta"], "frame.r_theta");
        if (t.contains("omega_width")) p.omega_width = positive(t["omega_width"], "frame.omega_width");
        if (t.contains("row_norm_bound")) p.row_norm_bound = positive(t["row_norm_bound"], "frame.row_norm_bound");
        if (t.contains("quad_nodes")) p.quad_nodes = positive_int(t["quad_nodes"], "frame.quad_nodes");
        if (t.contains("quad_tol")) p.quad_tol = positive(t["quad_tol"], "frame.quad_tol");
        if (t.contains("window_scale")) p.window_scale = positive(t["window_scale"], "frame.window_scale");
        if (t.contains("dynamic_range")) {
            cfg.frame.dynamic_range = positive(t["dynamic_range"], "frame.dynamic_range");
            if (cfg.frame.dynamic_range >= 1.0) bad("frame.dynamic_range", "must be below 1");
        }
        if (t.contains("box")) {
            const json& b = t["box"];
            check_keys(b, "frame.box", {"lo", "hi"});
            if (!b.contains("lo") || !b.contains("hi")) bad("frame.box", "expected lo and hi");
            const auto lo = num_list(b["lo"], "frame.box.lo");
            const auto hi = num_list(b["hi"], "frame.box.hi");
            if (lo.size() != hi.size()) bad("frame.box", "lo and hi differ in length");
            p.box_lo = Eigen::Map<const Vec>(lo.data(), static_cast<Eigen::Index>(lo.size()));
            p.box_hi = Eigen::Map<const Vec>(hi.data(), static_cast<Eigen::Index>(hi.size()));
        }
        if (t.contains("z")) {
            cfg.frame.z = complex_list(t["z"], "frame.z");
            if (cfg.frame.z.empty()) bad("frame.z", "empty");
        }
        if (t.contains("sweep")) {
            if (!t["sweep"].is_array()) bad("frame.sweep", "expected a list of L values");
            for (std::size_t i = 0; i < t["sweep"].size(); ++i)
                cfg.frame.sweep.push_back(positive_int(t["sweep"][i], "frame.sweep[" + std::to_string(i) + "]"));
        }
    }
    for (const char* which : {"count", "growth"}) {
        if (!j.contains(which)) continue;
        const json& t = j[which];
        const std::string w = which;
        check_keys(t, w, {"radii", "source", "M"});
        auto& radii = w == "count" ? cfg.count.radii : cfg.growth.radii;
        auto& source = w == "count" ? cfg.count.source : cfg.growth.source;
        auto& M = w == "count" ? cfg.count.M : cfg.growth.M;
        if (t.contains("radii")) radii = radii_list(t["radii"], w + ".radii");
        if (t.contains("source")) source = source_name(t["source"], w + ".source");
        if (t.contains("M")) M = positive_int(t["M"], w + ".M");
    }
    if (j.contains("output")) {
        const json& t = j["output"];
        check_keys(t, "output", {"csv", "json"});
        if (t.contains("csv")) cfg.output.csv = str(t["csv"], "output.csv");
        if (t.contains("json")) cfg.output.json = str(t["json"], "output.json");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cli", "load_config", path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace dyndet
