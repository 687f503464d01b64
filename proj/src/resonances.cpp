#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dyndet/determinant.hpp"
#include "dyndet/errors.hpp"
#include "dyndet/parallel.hpp"

namespace dyndet {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Rect {
    double x0, x1, y0, y1;
    cd center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
    double min_side() const { return std::min(x1 - x0, y1 - y0); }
    bool contains(cd z, double pad) const {
        return z.real() >= x0 - pad && z.real() <= x1 + pad && z.imag() >= y0 - pad && z.imag() <= y1 + pad;
    }
};

class Locator {
public:
    Locator(const EntireFn& f, const ResonanceOptions& opt) : f_(f), opt_(opt) {}

    double phase(cd z) const {
        cd l = f_.log(z);
        return std::isfinite(l.real()) ? l.imag() : kNaN;
    }

    // Phase increment along the segment a -> b, refined until steps are small and
    // halving no longer changes the sum. NaN when a zero sits on the segment.
    double increment(cd a, cd b, double pa, double pb, int depth = 0) const {
        if (!std::isfinite(pa) || !std::isfinite(pb)) return kNaN;
        const double d = std::remainder(pb - pa, kTwoPi);
        cd mid = 0.5 * (a + b);
        const double pm = phase(mid);
        if (!std::isfinite(pm)) return kNaN;
        const double d1 = std::remainder(pm - pa, kTwoPi), d2 = std::remainder(pb - pm, kTwoPi);
        if (depth >= 2 && std::abs(d) < 0.5 && std::abs(d1 + d2 - d) < 1e-9) return d;
        if (depth > 48) return kNaN;
        return increment(a, mid, pa, pm, depth + 1) + increment(mid, b, pm, pb, depth + 1);
    }

    double rect_winding_raw(const Rect& r) const {
        cd c[4] = {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}};
        double p[4];
        for (int i = 0; i < 4; ++i) p[i] = phase(c[i]);
        double total = 0.0;
        for (int i = 0; i < 4; ++i) total += increment(c[i], c[(i + 1) % 4], p[i], p[(i + 1) % 4]);
        return total / kTwoPi;
    }

    // Modified Newton on log f. Returns false when it wanders off or stalls.
    bool newton(cd z0, int mult, double scale, cd* out) const {
        cd z = z0;
        double last = scale;
        for (int it = 0; it < 200; ++it) {
            cd g = f_.log(z);
            if (!std::isfinite(g.real())) {
                *out = z;
                return true;
            }
            const double mag = std::max(1.0, std::abs(z));
            const double h = std::clamp(1e-3 * last, 1e-14 * mag, 1e-4 * mag);
            cd gp = wrap(f_.log(z + h) - f_.log(z - h)) / (2.0 * h);
            if (!std::isfinite(gp.real()) || !std::isfinite(gp.imag()) || gp == 0.0) return false;
            cd step = -static_cast<double>(mult) / gp;
            if (std::abs(step) > scale) step *= scale / std::abs(step);
            z += step;
            last = std::abs(step);
            if (last < opt_.newton_tol * mag) {
                *out = z;
                return true;
            }
        }
        return false;
    }

    void locate(const Rect& r, int w, int depth, std::vector<Resonance>& found) const {
        const double side = r.min_side();
        cd z;
        if (newton(r.center(), w, side, &z) && r.contains(z, 1e-9 * side)) {
            const double rho = 0.25 * side;
            int k = -1;
            try {
                k = winding_on_circle(f_, z, rho);
            } catch (const NumericalError&) {
                k = -1;
            }
            if (k == w) {
                found.push_back({z, w, std::exp(f_.log(z).real())});
                return;
            }
        }
        if (depth >= opt_.max_depth)
            throw NumericalError("determinant", "find_resonances",
                                 "cell (" + std::to_string(r.x0) + "," + std::to_string(r.y0) + ")-(" +
                                     std::to_string(r.x1) + "," + std::to_string(r.y1) + ")",
                                 "unresolved zero cluster of total multiplicity " + std::to_string(w));
        const double xm = r.x0 + 0.5371 * (r.x1 - r.x0), ym = r.y0 + 0.4813 * (r.y1 - r.y0);
        const Rect sub[4] = {{r.x0, xm, r.y0, ym}, {xm, r.x1, r.y0, ym}, {r.x0, xm, ym, r.y1}, {xm, r.x1, ym, r.y1}};
        double raw[4];
        for (int q = 0; q < 4; ++q) {
            raw[q] = rect_winding_raw(sub[q]);
            if (!std::isfinite(raw[q])) {
                // The phase is not resolvable inside this cell (evaluation noise near a
                // multiple zero). Its boundary winding still certifies the multiplicity.
                const cd at = r.contains(z, 0.0) ? z : r.center();
                found.push_back({at, w, std::exp(f_.log(at).real())});
                return;
            }
        }
        for (int q = 0; q < 4; ++q) {
            const long ws = std::lround(raw[q]);
            if (ws > 0) locate(sub[q], static_cast<int>(ws), depth + 1, found);
        }
    }

    static cd wrap(cd d) { return {d.real(), std::remainder(d.imag(), kTwoPi)}; }

private:
    const EntireFn& f_;
    const ResonanceOptions& opt_;
};

}  // namespace

ResonanceSet find_resonances(const EntireFn& f, double r, const ResonanceOptions& opt) {
    if (!(r > 0.0))
        throw ValidationError("determinant", "find_resonances", "r=" + std::to_string(r), "r must be > 0");
    const ZeroCountReport global = argument_principle_count(f, r);
    const double R = global.r;
    Locator loc(f, opt);
    const double h = R / opt.cells_per_radius;

    static const double shifts[][2] = {{0.3819660, 0.2360680}, {0.1458980, 0.6180340}, {0.7082039, 0.4508497},
                                       {0.5278640, 0.0901699}, {0.2917961, 0.8541020}};
    for (const auto& sh : shifts) {
        const double x0 = -R - sh[0] * h, y0 = -R - sh[1] * h;
        const int n = static_cast<int>(std::ceil((2.0 * R + h) / h)) + 1;
        std::vector<double> ph(static_cast<size_t>(n + 1) * (n + 1));
        auto vx = [&](int i) { return x0 + i * h; };
        auto vy = [&](int j) { return y0 + j * h; };
        auto at = [&](int i, int j) -> double& { return ph[static_cast<size_t>(i) * (n + 1) + j]; };
        parallel_for(ph.size(), [&](size_t q) {
            const int i = static_cast<int>(q / (n + 1)), j = static_cast<int>(q % (n + 1));
            ph[q] = loc.phase(cd(vx(i), vy(j)));
        });
        // H(i,j): (i,j)->(i+1,j); V(i,j): (i,j)->(i,j+1)
        std::vector<double> H(static_cast<size_t>(n) * (n + 1)), V(static_cast<size_t>(n + 1) * n);
        parallel_for(H.size(), [&](size_t q) {
            const int i = static_cast<int>(q / (n + 1)), j = static_cast<int>(q % (n + 1));
            H[q] = loc.increment(cd(vx(i), vy(j)), cd(vx(i + 1), vy(j)), at(i, j), at(i + 1, j));
        });
        parallel_for(V.size(), [&](size_t q) {
            const int i = static_cast<int>(q / n), j = static_cast<int>(q % n);
            V[q] = loc.increment(cd(vx(i), vy(j)), cd(vx(i), vy(j + 1)), at(i, j), at(i, j + 1));
        });
        bool bad = false;
        for (double v : H) bad |= !std::isfinite(v);
        for (double v : V) bad |= !std::isfinite(v);
        if (bad) continue;

        std::vector<Resonance> found;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double raw = H[static_cast<size_t>(i) * (n + 1) + j] + V[static_cast<size_t>(i + 1) * n + j] -
                                   H[static_cast<size_t>(i) * (n + 1) + j + 1] - V[static_cast<size_t>(i) * n + j];
                const long w = std::lround(raw / kTwoPi);
                if (w <= 0) continue;
                Rect cell{vx(i), vx(i + 1), vy(j), vy(j + 1)};
                loc.locate(cell, static_cast<int>(w), 0, found);
            }

        ResonanceSet out;
        out.provenance = "numerical";
        for (const auto& z : found) {
            if (std::abs(z.z) > R) continue;
            bool dup = false;
            for (const auto& o : out.zeros)
                if (std::abs(o.z - z.z) <= 1e-8 * std::max(1.0, std::abs(z.z))) dup = true;
            if (!dup) out.zeros.push_back(z);
        }
        sort_resonances(out);
        if (out.total() != global.count) {
            std::string where;
            for (const auto& z : out.zeros)
                if (std::abs(z.z) > 0.9 * R) where += " (" + std::to_string(z.z.real()) + "," + std::to_string(z.z.imag()) + ")";
            throw NumericalError("determinant", "find_resonances", "r=" + std::to_string(R),
                                 "local counts sum to " + std::to_string(out.total()) + " but the disk winding is " +
                                     std::to_string(global.count) + "; zeros near the rim:" + where);
        }
        return out;
    }
    throw NumericalError("determinant", "find_resonances", "r=" + std::to_string(R),
                         "every grid placement put a zero on a cell edge");
}

}  // namespace dyndet
