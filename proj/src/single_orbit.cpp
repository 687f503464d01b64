#include "dyndet/single_orbit.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "dyndet/errors.hpp"

namespace dyndet {

namespace {

constexpr double kUnitGap = 1e-9;
constexpr double kMergeTol = 1e-12;

struct Raw {
    cd value;
    std::vector<int> k, l;
    int zeta_index;
};

struct Walker {
    const OrbitSpectrum& spec;
    double r_min;
    std::vector<double> lam_abs, mu_abs;
    std::vector<double> suffix_min;  // product of the minimal factors of the coordinates not yet fixed
    std::vector<int> k, l;
    std::vector<Raw>& out;
    int zeta_index = 0;

    void walk(size_t coord, cd value) {
        const size_t nl = lam_abs.size();
        const size_t total = nl + mu_abs.size();
        if (coord == total) {
            out.push_back({value, k, l, zeta_index});
            return;
        }
        if (coord < nl) {
            cd step = 1.0 / spec.lambdas[coord];
            cd v = value * step;  // k = 1
            for (int e = 1;; ++e) {
                if (std::abs(v) * suffix_min[coord + 1] < r_min) break;
                k[coord] = e;
                walk(coord + 1, v);
                v *= step;
            }
        } else {
            const size_t q = coord - nl;
            cd v = value;
            for (int e = 0;; ++e) {
                if (std::abs(v) * suffix_min[coord + 1] < r_min) break;
                l[q] = e;
                walk(coord + 1, v);
                if (mu_abs[q] == 0.0) break;
                v *= spec.mus[q];
            }
        }
    }
};

}  // namespace

void validate_spectrum(const OrbitSpectrum& spec) {
    auto fail = [](const std::string& input, const std::string& what) {
        throw ValidationError("single-orbit", "validate_spectrum", input, what);
    };
    if (!(spec.t0 > 0.0)) fail("t0=" + std::to_string(spec.t0), "t0 must be > 0");
    for (const auto& lam : spec.lambdas)
        if (!(std::abs(lam) > 1.0 + kUnitGap)) fail("|lambda|=" + std::to_string(std::abs(lam)), "need |lambda| > 1");
    for (const auto& mu : spec.mus)
        if (!(std::abs(mu) < 1.0 - kUnitGap)) fail("|mu|=" + std::to_string(std::abs(mu)), "need |mu| < 1");
    if (spec.lambdas.empty() && !spec.mus.empty()) fail("lambdas=[]", "no unstable eigenvalue but stable ones given");
    const int dim = static_cast<int>(spec.lambdas.size() + spec.mus.size());
    if (spec.q_minus < 0 || spec.q_minus > dim) fail("q_minus=" + std::to_string(spec.q_minus), "q_minus out of range");
}

double lattice_abs_total(const OrbitSpectrum& spec) {
    double z = 0.0;
    for (const auto& zeta : spec.zetas) z += std::abs(zeta);
    double p = 1.0;
    for (const auto& lam : spec.lambdas) p /= std::abs(lam) - 1.0;
    for (const auto& mu : spec.mus) p /= 1.0 - std::abs(mu);
    return z * p;
}

std::vector<LatticeResonance> enumerate_lattice(const OrbitSpectrum& spec, double r_min) {
    validate_spectrum(spec);
    if (!(r_min > 0.0))
        throw ValidationError("single-orbit", "enumerate_lattice", "r_min=" + std::to_string(r_min), "r_min must be > 0");

    std::vector<Raw> raw;
    Walker w{spec, r_min, {}, {}, {}, {}, {}, raw};
    for (const auto& lam : spec.lambdas) w.lam_abs.push_back(std::abs(lam));
    for (const auto& mu : spec.mus) w.mu_abs.push_back(std::abs(mu));
    const size_t total = w.lam_abs.size() + w.mu_abs.size();
    w.suffix_min.assign(total + 1, 1.0);
    for (size_t c = total; c-- > 0;)
        w.suffix_min[c] = w.suffix_min[c + 1] * (c < w.lam_abs.size() ? 1.0 / w.lam_abs[c] : 1.0);
    w.k.assign(spec.lambdas.size(), 0);
    w.l.assign(spec.mus.size(), 0);
    const double sign = (spec.q_minus % 2) ? -1.0 : 1.0;
    for (size_t zi = 0; zi < spec.zetas.size(); ++zi) {
        if (spec.zetas[zi] == 0.0) continue;
        w.zeta_index = static_cast<int>(zi);
        w.walk(0, sign * spec.zetas[zi]);
    }

    std::stable_sort(raw.begin(), raw.end(),
                     [](const Raw& a, const Raw& b) { return std::abs(a.value) > std::abs(b.value); });
    std::vector<LatticeResonance> groups;
    for (const auto& r : raw) {
        const double mod = std::abs(r.value);
        bool merged = false;
        for (size_t g = groups.size(); g-- > 0;) {
            const double gm = std::abs(groups[g].value);
            if (gm > mod * (1.0 + 10 * kMergeTol)) break;
            if (std::abs(groups[g].value - r.value) <= kMergeTol * std::max(gm, mod)) {
                ++groups[g].multiplicity;
                merged = true;
                break;
            }
        }
        if (!merged) groups.push_back({r.value, 1, r.k, r.l, r.zeta_index});
    }
    std::stable_sort(groups.begin(), groups.end(), [](const LatticeResonance& a, const LatticeResonance& b) {
        const double ma = std::abs(a.value), mb = std::abs(b.value);
        if (std::abs(ma - mb) > kMergeTol * std::max(ma, mb)) return ma > mb;
        return std::arg(a.value) < std::arg(b.value);
    });
    return groups;
}

namespace {

struct Lattice {
    std::vector<LatticeResonance> points;
    double tail_abs = 0.0;  // sum of |rho| over the dropped part
    double r_min = 0.0;
};

Lattice make_lattice(const OrbitSpectrum& spec, double r_min) {
    Lattice lat;
    lat.r_min = r_min;
    lat.points = enumerate_lattice(spec, r_min);
    double kept = 0.0;
    for (const auto& p : lat.points) kept += p.multiplicity * std::abs(p.value);
    lat.tail_abs = std::max(0.0, lattice_abs_total(spec) - kept);
    return lat;
}

ProductValue evaluate(const Lattice& lat, double t0, cd z) {
    const cd w = std::exp(-z * t0);
    cd logv = 0.0;
    for (const auto& p : lat.points) logv += static_cast<double>(p.multiplicity) * std::log(1.0 - p.value * w);
    ProductValue out;
    out.log_value = logv;
    out.value = std::exp(logv);
    const double aw = std::abs(w);
    out.tail_bound = (lat.r_min * aw <= 0.5) ? 2.0 * aw * lat.tail_abs : INFINITY;
    return out;
}

}  // namespace

ProductValue single_orbit_det(const OrbitSpectrum& spec, cd z, double r_min) {
    return evaluate(make_lattice(spec, r_min), spec.t0, z);
}

EntireFn single_orbit_handle(const OrbitSpectrum& spec, double re_min, double tol) {
    validate_spectrum(spec);
    const double aw = std::exp(-re_min * spec.t0);
    double top = 0.0;
    for (const auto& zeta : spec.zetas) top = std::max(top, std::abs(zeta));
    for (const auto& lam : spec.lambdas) top /= std::abs(lam);
    auto lat = std::make_shared<Lattice>();
    if (top == 0.0) {
        lat->r_min = 1.0;
    } else {
        double r_min = top * 0.5;
        for (int it = 0; it < 400; ++it) {
            *lat = make_lattice(spec, r_min);
            if (r_min * aw <= 0.5 && 2.0 * aw * lat->tail_abs <= tol) break;
            r_min *= 0.5;
        }
    }
    const double t0 = spec.t0;
    return EntireFn{[lat, t0](cd z) { return evaluate(*lat, t0, z).log_value; }};
}

ResonanceSet single_orbit_resonances(const OrbitSpectrum& spec, double r) {
    if (!(r > 0.0))
        throw ValidationError("single-orbit", "single_orbit_resonances", "r=" + std::to_string(r), "r must be > 0");
    ResonanceSet out;
    out.provenance = "lattice";
    const double t0 = spec.t0;
    const auto lattice = enumerate_lattice(spec, std::exp(-r * t0) * (1.0 - 1e-9));
    const double two_pi = 2.0 * std::numbers::pi;
    for (const auto& p : lattice) {
        const double re = std::log(std::abs(p.value)) / t0;
        if (std::abs(re) > r) continue;
        const double arg = std::arg(p.value);
        const double im_max = std::sqrt(std::max(0.0, r * r - re * re));
        const long kmin = static_cast<long>(std::ceil((-im_max * t0 - arg) / two_pi));
        const long kmax = static_cast<long>(std::floor((im_max * t0 - arg) / two_pi));
        for (long kk = kmin; kk <= kmax; ++kk) {
            cd z(re, (arg + two_pi * static_cast<double>(kk)) / t0);
            if (std::abs(z) <= r) out.zeros.push_back({z, p.multiplicity, 0.0});
        }
    }
    sort_resonances(out);
    return out;
}

OrbitSpectrum spectrum_from_system(const FlowSystem& sys) {
    if (sys.graph.size() != 1 || !sys.graph.admissible(0, 0))
        throw ValidationError("single-orbit", "spectrum_from_system", "#symbols=" + std::to_string(sys.graph.size()),
                              "need exactly one symbol with a self-loop");
    const EdgeMap& e = sys.edge(0, 0);
    const int nm1 = sys.section_dim;
    OrbitSpectrum spec;
    Vec x = nm1 > 0 ? Vec((Mat::Identity(nm1, nm1) - e.linear).fullPivLu().solve(e.offset)) : Vec();
    spec.t0 = e.roof(x);
    auto take = [&](const Mat& block, std::vector<cd>& dst) {
        if (block.rows() == 0) return;
        Eigen::EigenSolver<Mat> es(block);
        Eigen::JacobiSVD<CMat> svd(es.eigenvectors());
        const auto& sv = svd.singularValues();
        if (!(sv(sv.size() - 1) > 1e-10 * sv(0)))
            throw ValidationError("single-orbit", "spectrum_from_system", "", "Poincare map is not diagonalizable");
        for (int i = 0; i < es.eigenvalues().size(); ++i) {
            cd v = es.eigenvalues()(i);
            dst.push_back(v);
            if (std::abs(v.imag()) <= 1e-12 * std::abs(v) && v.real() < -1.0) ++spec.q_minus;
        }
    };
    take(e.linear.topLeftCorner(sys.d_u, sys.d_u), spec.lambdas);
    take(e.linear.bottomRightCorner(sys.d_s, sys.d_s), spec.mus);
    Eigen::ComplexEigenSolver<CMat> ces(e.lift);
    for (int i = 0; i < ces.eigenvalues().size(); ++i) spec.zetas.push_back(ces.eigenvalues()(i));
    validate_spectrum(spec);
    return spec;
}

void sort_resonances(ResonanceSet& set) {
    std::stable_sort(set.zeros.begin(), set.zeros.end(), [](const Resonance& a, const Resonance& b) {
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });
}

}  // namespace dyndet
