#include "dyndet/cli.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dyndet/bowen.hpp"
#include "dyndet/config.hpp"
#include "dyndet/determinant.hpp"
#include "dyndet/entire.hpp"
#include "dyndet/errors.hpp"
#include "dyndet/frames.hpp"
#include "dyndet/orbits.hpp"
#include "dyndet/parallel.hpp"
#include "dyndet/single_orbit.hpp"

namespace dyndet {

namespace {

using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct Overrides {
    std::string config;
    std::string out;
    std::string json_out;
    int threads = -1;
    double r = 0.0;
    int M = 0;
    int m = 0;
    std::string z;
    int L = -1;
    double epsilon = -1.0;
    double delta = 0.0;
    std::string radii;
};

cd parse_complex_flag(const std::string& s) {
    std::istringstream in(s);
    double re = 0.0, im = 0.0;
    char comma = 0;
    if (!(in >> re)) throw ValidationError("cli", "run", "--z=" + s, "expected re or re,im");
    if (in >> comma) {
        if (comma != ',' || !(in >> im)) throw ValidationError("cli", "run", "--z=" + s, "expected re,im");
    }
    return {re, im};
}

std::vector<double> parse_list_flag(const std::string& s, const std::string& flag) {
    std::vector<double> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size() || !(v > 0.0)) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw ValidationError("cli", "run", flag + "=" + s, "expected a comma-separated list of positive numbers");
        }
    }
    if (out.empty()) throw ValidationError("cli", "run", flag + "=" + s, "empty list");
    return out;
}

/// Sink for one output kind: a file when a path is given, `fallback` otherwise.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ValidationError("cli", "run", path, "cannot open output file");
            stream_ = file_.get();
            to_file_ = true;
        }
    }
    std::ostream& operator*() { return *stream_; }
    bool to_file() const { return to_file_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
    bool to_file_ = false;
};

const FlowSystem& require_system(const RunConfig& cfg, const std::string& cmd) {
    if (!cfg.system) throw ValidationError("cli", cmd, "<config>", "no system definition in config");
    const ValidationReport rep = validate_system(*cfg.system);
    if (!rep.ok()) throw ValidationError("core-model", "validate_system", "<config>", rep.violations.front());
    return *cfg.system;
}

std::string word_string(const FlowSystem& sys, const Word& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += '-';
        s += sys.graph.symbols[static_cast<std::size_t>(w[i])];
    }
    return s;
}

std::string tuple_string(const KindTuple& k) {
    std::string s = "(";
    for (std::size_t i = 0; i < k.size(); ++i) s += (i ? " " : "") + std::to_string(k[i]);
    return s + ")";
}

/// Evaluation handle for count and growth.
struct Source {
    std::string name;
    EntireFn f;
};

std::optional<OrbitSpectrum> spectrum_of(const RunConfig& cfg) {
    if (cfg.single_orbit.spectrum) return cfg.single_orbit.spectrum;
    if (cfg.system && cfg.system->graph.size() == 1 && validate_system(*cfg.system).ok())
        return spectrum_from_system(*cfg.system);
    return std::nullopt;
}

Source pick_source(const RunConfig& cfg, const std::string& wanted, int M, double r_max, const std::string& cmd) {
    const double re_min = -r_max - 1.0;
    if (wanted == "closed_form" || wanted == "auto") {
        if (cfg.system && validate_system(*cfg.system).ok()) {
            try {
                const LatticeClosedForm cf = make_closed_form(*cfg.system);
                return {"closed_form", closed_form_handle(cf, re_min)};
            } catch (const ValidationError&) {
                if (wanted == "closed_form") throw;
            }
        } else if (wanted == "closed_form") {
            require_system(cfg, cmd);
        }
    }
    if (wanted == "single_orbit" || wanted == "auto") {
        if (auto spec = spectrum_of(cfg)) {
            validate_spectrum(*spec);
            return {"single_orbit", single_orbit_handle(*spec, re_min)};
        }
        if (wanted == "single_orbit")
            throw ValidationError("cli", cmd, "source=single_orbit", "no single_orbit block or one-symbol system");
    }
    const FlowSystem& sys = require_system(cfg, cmd);
    auto series = std::make_shared<const TraceSeries>(build_trace_series(sys, M, cfg.orbit_cap));
    return {"det", det_handle(series, M)};
}

int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (!cfg.system) throw ValidationError("cli", "validate", "<config>", "no system definition in config");
    const ValidationReport rep = validate_system(*cfg.system);
    for (const auto& v : rep.violations) err << "violation: " << v << "\n";
    for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
    out << rep.violations.size() << " violations, " << rep.warnings.size() << " warnings\n";
    return rep.ok() ? 0 : 1;
}

int cmd_orbits(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
    const FlowSystem& sys = require_system(cfg, "orbits");
    const int m_max = o.m > 0 ? o.m : cfg.orbits.m;
    const int cap = cfg.orbit_cap > 0 ? cfg.orbit_cap : default_orbit_cap(sys.graph.size());
    if (m_max > cap)
        throw ValidationError("orbit-enum", "enumerate_fixed_words", "m=" + std::to_string(m_max),
                              "exceeds orbit cap " + std::to_string(cap));
    Sink csv(o.out.empty() ? cfg.output.csv : o.out, out);
    *csv << "word,m,m_primitive,T,T_primitive,det_factor,re_lift_trace,im_lift_trace\n";
    std::size_t classes = 0;
    for (int m = 1; m <= m_max; ++m) {
        const auto orbits = group_into_orbits(enumerate_fixed_words(sys.graph, m));
        std::vector<PeriodicOrbitRecord> recs(orbits.size());
        parallel_for(orbits.size(), [&](std::size_t i) { recs[i] = orbit_data(sys, orbits[i]); });
        for (const auto& r : recs) {
            *csv << word_string(sys, r.word.letters) << "," << r.word.m() << "," << r.word.minimal_period << ","
                 << fmt(r.T) << "," << fmt(r.T_primitive) << "," << fmt(r.det_factor) << "," << fmt(r.lift_trace.real())
                 << "," << fmt(r.lift_trace.imag()) << "\n";
        }
        classes += recs.size();
    }
    (csv.to_file() ? out : err) << classes << " orbit classes up to m=" << m_max << "\n";
    return 0;
}

int cmd_traces(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
    const FlowSystem& sys = require_system(cfg, "traces");
    const int m_max = o.m > 0 ? o.m : cfg.traces.m;
    const cd z = o.z.empty() ? cfg.traces.z : parse_complex_flag(o.z);
    const TraceSeries series = build_trace_series(sys, m_max, cfg.orbit_cap);
    Sink csv(o.out.empty() ? cfg.output.csv : o.out, out);
    *csv << "m,re_trace,im_trace\n";
    for (int m = 1; m <= m_max; ++m) {
        const cd t = series.trace(m, z);
        *csv << m << "," << fmt(t.real()) << "," << fmt(t.imag()) << "\n";
    }
    (csv.to_file() ? out : err) << m_max << " traces at z=" << fmt(z.real()) << "," << fmt(z.imag()) << "\n";
    return 0;
}

int cmd_det(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
    const FlowSystem& sys = require_system(cfg, "det");
    const int M = o.M > 0 ? o.M : cfg.det.M;
    const TraceSeries series = build_trace_series(sys, M, cfg.orbit_cap);
    const auto pts = cfg.det.grid.points();
    std::vector<DetValue> vals(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        vals[i] = evaluate_det(series, pts[i], M, sys.gevrey_s, sys.section_dim);
    });
    Sink csv(o.out.empty() ? cfg.output.csv : o.out, out);
    *csv << "re_z,im_z,re_d,im_d,tail_estimate\n";
    double worst_tail = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        *csv << fmt(pts[i].real()) << "," << fmt(pts[i].imag()) << "," << fmt(vals[i].value.real()) << ","
             << fmt(vals[i].value.imag()) << "," << fmt(vals[i].tail_estimate) << "\n";
        worst_tail = std::max(worst_tail, vals[i].tail_estimate);
    }
    (csv.to_file() ? out : err) << pts.size() << " points, M=" << M << ", max tail estimate " << fmt(worst_tail)
                                << "\n";
    return 0;
}

void write_resonances(std::ostream& os, const ResonanceSet& set, bool with_residual) {
    os << (with_residual ? "re,im,multiplicity,residual\n" : "re,im,multiplicity\n");
    for (const auto& z : set.zeros) {
        os << fmt(z.z.real()) << "," << fmt(z.z.imag()) << "," << z.multiplicity;
        if (with_residual) os << "," << fmt(z.residual);
        os << "\n";
    }
}

int cmd_resonances(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
    const FlowSystem& sys = require_system(cfg, "resonances");
    const int M = o.M > 0 ? o.M : cfg.resonances.M;
    const double r = o.r > 0.0 ? o.r : cfg.resonances.r;
    auto series = std::make_shared<const TraceSeries>(build_trace_series(sys, M, cfg.orbit_cap));
    ResonanceSet set = find_resonances(det_handle(series, M), r);
    sort_resonances(set);
    Sink csv(o.out.empty() ? cfg.output.csv : o.out, out);
    write_resonances(*csv, set, true);
    double worst = 0.0;
    for (const auto& z : set.zeros) worst = std::max(worst, z.residual);
    (csv.to_file() ? out : err) << set.zeros.size() << " zeros (" << set.total()
                                << " with multiplicity) in |z| <= " << fmt(r) << ", max residual " << fmt(worst)
                                << "\n";
    return 0;
}

int cmd_single_orbit(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
    auto spec = spectrum_of(cfg);
    if (!spec) {
        if (cfg.system) require_system(cfg, "single-orbit");
        throw ValidationError("single-orbit", "single_orbit_resonances", "<config>",
                              "needs a single_orbit block or a one-symbol system");
    }
    validate_spectrum(*spec);
    const double r = o.r > 0.0 ? o.r : cfg.single_orbit.r;
    ResonanceSet set = single_orbit_resonances(*spec, r);
    sort_resonances(set);
    Sink csv(o.out.empty() ? cfg.output.csv : o.out, out);
    write_resonances(*csv, set, false);
    (csv.to_file() ? out : err) << set.zeros.size() << " zeros (" << set.total()
                                << " with multiplicity) in |z| <= " << fmt(r) << "\n";
    return 0;
}

int cmd_bowen(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
    const FlowSystem& sys = require_system(cfg, "bowen");
    const CoOccurrenceOracle oracle = cfg.bowen.singleton ? singleton_oracle() : table_oracle(cfg.bowen.oracle);
    const auto family = build_family(sys.graph, oracle);
    Sink csv(o.out.empty() ? cfg.output.csv : o.out, out);
    *csv << "k,length,vertices,edges,role\n";
    int odd = 0, even = 0;
    for (const auto& g : family) {
        const bool num = g.k.size() % 2 == 1;
        (num ? odd : even)++;
        *csv << tuple_string(g.k) << "," << g.k.size() << "," << g.vertices.size() << "," << g.edge_count() << ","
             << (num ? "numerator" : "denominator") << "\n";
    }
    (csv.to_file() ? out : err) << family.size() << " tuples in N, " << odd << " in the numerator, " << even
                                << " in the denominator\n";
    return 0;
}

int cmd_frame_det(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
    const FlowSystem& sys = require_system(cfg, "frame-det");
    FrameParams p = cfg.frame.params;
    if (o.L >= 0) p.L = o.L;
    if (o.delta > 0.0) p.delta = o.delta;
    EscapeWeight w;
    w.epsilon = o.epsilon >= 0.0 ? o.epsilon : cfg.frame.epsilon;
    w.s = sys.gevrey_s;
    w.d_u = sys.d_u;
    w.d_s = sys.d_s;
    const std::vector<cd> zs = o.z.empty() ? cfg.frame.z : std::vector<cd>{parse_complex_flag(o.z)};
    std::vector<int> Ls = cfg.frame.sweep;
    if (Ls.empty() || o.L >= 0) Ls = {p.L};

    Sink csv(o.out.empty() ? cfg.output.csv : o.out, out);
    *csv << "re_z,im_z,L,re_det,im_det,step,epsilon,quad_error\n";
    json profiles = json::array();
    for (const cd z : zs) {
        std::optional<GalerkinMatrix> chosen;
        cd prev = 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < Ls.size(); ++i) {
            p.L = Ls[i];
            GalerkinMatrix m = assemble_operator(sys, z, p, w);
            const cd d = galerkin_det(m);
            const double step = i == 0 ? std::numeric_limits<double>::infinity() : std::abs(d - prev);
            *csv << fmt(z.real()) << "," << fmt(z.imag()) << "," << p.L << "," << fmt(d.real()) << ","
                 << fmt(d.imag()) << "," << (i == 0 ? std::string("") : fmt(step)) << "," << fmt(m.epsilon) << ","
                 << fmt(m.quad_error) << "\n";
            if (i == 0 || step < best) {
                if (i > 0) best = step;
                chosen = std::move(m);
            }
            prev = d;
        }
        json prof;
        prof["re_z"] = z.real();
        prof["im_z"] = z.imag();
        prof["L"] = chosen->L;
        prof["epsilon"] = chosen->epsilon;
        try {
            const DecayFit fit = decay_profile(*chosen, sys.gevrey_s, sys.section_dim, cfg.frame.dynamic_range);
            prof["singular_values"] = fit.singular_values;
            prof["fit"] = {{"exponent", fit.exponent}, {"fitted", fit.fitted}, {"slope", fit.slope},
                           {"intercept", fit.intercept}, {"r2", fit.r2}};
        } catch (const NumericalError& e) {
            prof["fit"] = nullptr;
            prof["fit_error"] = e.what();
        }
        profiles.push_back(prof);
    }
    json doc = {{"schema_version", kSchemaVersion}, {"kind", "decay_profile"}, {"profiles", profiles}};
    Sink js(o.json_out.empty() ? cfg.output.json : o.json_out, out);
    *js << doc.dump(2) << "\n";
    (csv.to_file() && js.to_file() ? out : err) << zs.size() << " points, L in {" << Ls.front() << ".."
                                                << Ls.back() << "}\n";
    return 0;
}

int cmd_count(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
    const std::vector<double> radii = o.radii.empty() ? cfg.count.radii : parse_list_flag(o.radii, "--radii");
    const int M = o.M > 0 ? o.M : cfg.count.M;
    const Source src = pick_source(cfg, cfg.count.source, M, *std::max_element(radii.begin(), radii.end()), "count");
    std::vector<ZeroCountReport> reps(radii.size());
    for (std::size_t i = 0; i < radii.size(); ++i) reps[i] = argument_principle_count(src.f, radii[i]);
    Sink csv(o.out.empty() ? cfg.output.csv : o.out, out);
    *csv << "r,N,residual\n";
    for (const auto& rep : reps) *csv << fmt(rep.r) << "," << rep.count << "," << fmt(rep.residual) << "\n";
    (csv.to_file() ? out : err) << radii.size() << " radii, source " << src.name << ", N(max r)="
                                << reps.back().count << "\n";
    return 0;
}

int cmd_growth(const RunConfig& cfg, const Overrides& o, std::ostream& out, std::ostream& err) {
    const std::vector<double> radii = o.radii.empty() ? cfg.growth.radii : parse_list_flag(o.radii, "--radii");
    const int M = o.M > 0 ? o.M : cfg.growth.M;
    const Source src =
        pick_source(cfg, cfg.growth.source, M, *std::max_element(radii.begin(), radii.end()), "growth");
    const GrowthFit fit = growth_order_fit(src.f, radii);
    json doc = {{"schema_version", kSchemaVersion},
                {"kind", "growth_fit"},
                {"source", src.name},
                {"radii", fit.radii},
                {"log_max_modulus", fit.log_max_modulus},
                {"alpha", fit.alpha},
                {"log_C", fit.log_C},
                {"residual", fit.residual},
                {"monotone", fit.monotone},
                {"too_small", fit.too_small},
                {"log_modulus_negative_axis", fit.log_modulus_negative_axis},
                {"alpha_negative_axis", fit.alpha_negative_axis}};
    Sink js(o.json_out.empty() ? cfg.output.json : o.json_out, out);
    *js << doc.dump(2) << "\n";
    (js.to_file() ? out : err) << "alpha=" << fmt(fit.alpha) << ", negative axis alpha=" << fmt(fit.alpha_negative_axis)
                               << ", source " << src.name << "\n";
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dynamical determinants and resonances of symbolically coded suspension flows"};
    app.require_subcommand(1);
    Overrides o;

    struct Spec {
        const char* name;
        const char* help;
        const char* columns;
    };
    const std::vector<Spec> specs = {
        {"validate", "Check the system definition", "Prints '<v> violations, <w> warnings'."},
        {"orbits", "Periodic orbit classes up to word length m",
         "CSV columns: word,m,m_primitive,T,T_primitive,det_factor,re_lift_trace,im_lift_trace"},
        {"traces", "Traces s_m(z) for m = 1..m", "CSV columns: m,re_trace,im_trace"},
        {"det", "Truncated determinant on a grid", "CSV columns: re_z,im_z,re_d,im_d,tail_estimate"},
        {"resonances", "Zeros of the truncated determinant in |z| <= r",
         "CSV columns: re,im,multiplicity,residual (|d| at the zero)"},
        {"single-orbit", "Lattice resonances of a one-orbit basic set", "CSV columns: re,im,multiplicity"},
        {"bowen", "Correction family and alternating assembly plan", "CSV columns: k,length,vertices,edges,role"},
        {"frame-det", "Galerkin determinants on the windowed Fourier frame",
         "CSV columns: re_z,im_z,L,re_det,im_det,step,epsilon,quad_error; JSON: decay profile per z"},
        {"count", "Argument-principle zero counts N(r)", "CSV columns: r,N,residual"},
        {"growth", "Growth-order fit of log M(r)", "JSON: growth fit with schema_version"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& s : specs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->footer(s.columns);
        sub->add_option("-c,--config", o.config, "Run config (JSON)")->required();
        sub->add_option("--threads", o.threads, "Worker cap, 0 for all cores");
        const std::string n = s.name;
        if (n != "validate") sub->add_option("-o,--out", o.out, "CSV output path (default: standard output)");
        if (n == "frame-det" || n == "growth") sub->add_option("--json", o.json_out, "JSON output path");
        if (n == "orbits" || n == "traces") sub->add_option("--m", o.m, "Largest word length");
        if (n == "traces" || n == "frame-det") sub->add_option("--z", o.z, "Complex point as re or re,im");
        if (n == "det" || n == "resonances" || n == "count" || n == "growth")
            sub->add_option("--M", o.M, "Truncation order");
        if (n == "resonances" || n == "single-orbit") sub->add_option("--r", o.r, "Disk radius");
        if (n == "frame-det") {
            sub->add_option("--L", o.L, "Frequency cutoff |l|_inf <= L");
            sub->add_option("--epsilon", o.epsilon, "Escape weight exponent");
            sub->add_option("--delta", o.delta, "Window scale delta");
        }
        if (n == "count" || n == "growth") sub->add_option("--radii", o.radii, "Comma-separated radii");
        subs.push_back(sub);
    }

    std::vector<std::string> argv_store = {"dyndet"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_store) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        const RunConfig cfg = load_config(o.config);
        set_thread_count(o.threads >= 0 ? o.threads : cfg.threads);
        const std::string cmd = app.get_subcommands().front()->get_name();
        if (cmd == "validate") return cmd_validate(cfg, out, err);
        if (cmd == "orbits") return cmd_orbits(cfg, o, out, err);
        if (cmd == "traces") return cmd_traces(cfg, o, out, err);
        if (cmd == "det") return cmd_det(cfg, o, out, err);
        if (cmd == "resonances") return cmd_resonances(cfg, o, out, err);
        if (cmd == "single-orbit") return cmd_single_orbit(cfg, o, out, err);
        if (cmd == "bowen") return cmd_bowen(cfg, o, out, err);
        if (cmd == "frame-det") return cmd_frame_det(cfg, o, out, err);
        if (cmd == "count") return cmd_count(cfg, o, out, err);
        return cmd_growth(cfg, o, out, err);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 2;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace dyndet
