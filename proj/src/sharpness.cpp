#include "subell/sharpness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

namespace subell {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// C^2 quintic step, 1 at t = 0 down to 0 at t = 1; the (1-t)^3 form keeps the
// tail exact near the support edge (same convention as the battery cutoffs).
double step5(double t) {
    const double s = 1.0 - t;
    return s * s * s * (1.0 + 3.0 * t + 6.0 * t * t);
}
double step5_d(double t) { return -30.0 * t * t * (1.0 - t) * (1.0 - t); }
double step5_d2(double t) { return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

InequalityReport plain_report(const InequalityContext& ctx, const std::string& id, int field,
                              double alpha, double beta) {
    if (id == "hardy") return ctx.hardy(field, alpha, beta);
    if (id == "uncertainty-weighted")
        return ctx.uncertainty(field, beta, UncertaintyForm::Weighted);
    if (id == "uncertainty-plain") return ctx.uncertainty(field, beta, UncertaintyForm::Plain);
    if (id == "rellich") return ctx.rellich(field, alpha, beta);
    if (id == "rellich-grad") return ctx.rellich_gradient(field, alpha, beta);
    throw std::invalid_argument("rayleigh_ratio: unknown inequality '" + id + "'");
}

}  // namespace

TrialFamily mollified_power_family(const FundamentalSolution& fs, double radius, double p,
                                   double log_eps_lo, double log_eps_hi) {
    require(radius > 0.0, "mollified_power_family: radius must be positive");
    require(p >= 0.0, "mollified_power_family: exponent must be nonnegative");
    require(log_eps_lo < log_eps_hi && log_eps_hi < std::log(radius),
            "mollified_power_family: need log_eps_lo < log_eps_hi < log(radius)");
    const FieldPtr s2 = fs.gauge_power_field(2.0);
    const double r2 = radius * radius;
    TrialFamily fam;
    fam.description = "mollified-power";
    fam.params = 2;
    fam.lo = {log_eps_lo, 0.1};
    fam.hi = {log_eps_hi, 0.7};
    fam.make = [s2, r2, radius, p](View th) {
        const double e2 = std::exp(2.0 * th[0]);
        const double a = th[1];  // plateau end as a fraction of the radius
        const double w = 1.0 - a;
        // u = A(s) chi(rho) on s = d^2, rho = d/radius, A = (s + eps^2)^(-p/2);
        // the cutoff is 1 on rho <= a and reaches 0 at the boundary.
        AxisProfile g;
        g.f = [=](double s) {
            if (s >= r2) return 0.0;
            const double amp = std::pow(s + e2, -0.5 * p);
            const double rho = std::sqrt(s) / radius;
            return rho <= a ? amp : amp * step5((rho - a) / w);
        };
        g.df = [=](double s) {
            if (s >= r2) return 0.0;
            const double amp = std::pow(s + e2, -0.5 * p);
            const double damp = -0.5 * p * amp / (s + e2);
            const double rho = std::sqrt(s) / radius;
            if (rho <= a) return damp;
            const double t = (rho - a) / w;
            const double dt = 1.0 / (2.0 * w * r2 * rho);
            return damp * step5(t) + amp * step5_d(t) * dt;
        };
        g.d2f = [=](double s) {
            if (s >= r2) return 0.0;
            const double amp = std::pow(s + e2, -0.5 * p);
            const double damp = -0.5 * p * amp / (s + e2);
            const double d2amp = 0.5 * p * (0.5 * p + 1.0) * amp / ((s + e2) * (s + e2));
            const double rho = std::sqrt(s) / radius;
            if (rho <= a) return d2amp;
            const double t = (rho - a) / w;
            const double dt = 1.0 / (2.0 * w * r2 * rho);
            const double d2t = -1.0 / (4.0 * w * r2 * r2 * rho * rho * rho);
            return d2amp * step5(t) + 2.0 * damp * step5_d(t) * dt +
                   amp * (step5_d2(t) * dt * dt + step5_d(t) * d2t);
        };
        return compose_field(g, s2, "mollified-power");
    };
    return fam;
}

TrialFamily log_bump_family(const FundamentalSolution& fs, double radius, double p, double t_lo,
                            double t_hi, double gamma_lo, double gamma_hi) {
    require(radius > 0.0, "log_bump_family: radius must be positive");
    require(p >= 0.0, "log_bump_family: exponent must be nonnegative");
    require(0.0 < t_lo && t_lo < t_hi, "log_bump_family: need 0 < t_lo < t_hi");
    require(1.0 < gamma_lo && gamma_lo < gamma_hi,
            "log_bump_family: need 1 < gamma_lo < gamma_hi for C^1 members");
    const FieldPtr s2 = fs.gauge_power_field(2.0);
    const double r2 = radius * radius;
    TrialFamily fam;
    fam.description = "log-bump";
    fam.params = 2;
    fam.lo = {t_lo, gamma_lo};
    fam.hi = {t_hi, gamma_hi};
    fam.make = [s2, r2, p](View th) {
        const double T = th[0], gam = th[1];
        // u = s^(-p/2) phi(t) on s = d^2, t = log(r2/s)/(2T),
        // phi = (t - t^2)^gamma on (0, 1) and 0 outside.
        AxisProfile g;
        g.f = [=](double s) {
            if (!(s > 0.0) || s >= r2) return 0.0;
            const double t = std::log(r2 / s) / (2.0 * T);
            if (t >= 1.0) return 0.0;
            return std::pow(s, -0.5 * p) * std::pow(t - t * t, gam);
        };
        g.df = [=](double s) {
            if (!(s > 0.0) || s >= r2) return 0.0;
            const double t = std::log(r2 / s) / (2.0 * T);
            if (t >= 1.0) return 0.0;
            const double m = t - t * t;
            const double phi = std::pow(m, gam);
            const double dphi = gam * std::pow(m, gam - 1.0) * (1.0 - 2.0 * t);
            return std::pow(s, -0.5 * p - 1.0) * (-0.5 * p * phi - dphi / (2.0 * T));
        };
        g.d2f = [=](double s) {
            if (!(s > 0.0) || s >= r2) return 0.0;
            const double t = std::log(r2 / s) / (2.0 * T);
            if (t >= 1.0) return 0.0;
            const double m = t - t * t;
            const double phi = std::pow(m, gam);
            const double dphi = gam * std::pow(m, gam - 1.0) * (1.0 - 2.0 * t);
            const double d2phi = gam * (gam - 1.0) * std::pow(m, gam - 2.0) * sq(1.0 - 2.0 * t) -
                                 2.0 * gam * std::pow(m, gam - 1.0);
            return std::pow(s, -0.5 * p - 2.0) *
                   (0.5 * p * (0.5 * p + 1.0) * phi + (p + 1.0) * dphi / (2.0 * T) +
                    d2phi / (4.0 * T * T));
        };
        return compose_field(g, s2, "log-bump");
    };
    return fam;
}

double trial_exponent(const std::string& inequality, const FundamentalSolution& fs, double alpha,
                      double beta) {
    require(beta > 2.0, "trial_exponent: requires beta > 2");
    const double k = (2.0 - fs.beta()) / (2.0 - beta);
    if (inequality == "hardy") return 0.5 * k * (beta + alpha - 2.0);
    if (inequality == "rellich" || inequality == "rellich-grad")
        return 0.5 * k * (beta + alpha - 4.0);
    throw std::invalid_argument("trial_exponent: no formal extremizer for '" + inequality + "'");
}

double ratio_lower_bound(const std::string& inequality, double alpha, double beta) {
    if (inequality == "hardy") {
        validate_hardy_parameters(alpha, beta);
        return sq(0.5 * (beta + alpha - 2.0));
    }
    if (inequality == "uncertainty-weighted" || inequality == "uncertainty-plain") {
        validate_uncertainty_parameters(beta);
        return sq(0.5 * (beta - 2.0));
    }
    if (inequality == "rellich") {
        validate_rellich_parameters(alpha, beta);
        return sq(0.25 * (beta + alpha - 4.0) * (beta - alpha));
    }
    if (inequality == "rellich-grad") {
        validate_rellich_gradient_parameters(alpha, beta);
        return sq(0.5 * (beta - alpha));
    }
    throw std::invalid_argument("ratio_lower_bound: unknown inequality '" + inequality + "'");
}

double rayleigh_ratio(const InequalityReport& rep) {
    double num = rep.lhs;
    const TermBreakdown* main = nullptr;
    for (const TermBreakdown& t : rep.terms) {
        if (t.label == "main")
            main = &t;
        else
            num -= t.value;
    }
    require(main != nullptr, "rayleigh_ratio: report has no main term");
    if (!(std::abs(main->integral) >= 1e-14))
        throw std::invalid_argument("rayleigh_ratio: degenerate trial, main integral below 1e-14");
    return num / main->integral;
}

double rayleigh_ratio(const std::string& inequality, const InequalityContext& ctx, int field,
                      double alpha, double beta) {
    return rayleigh_ratio(plain_report(ctx, inequality, field, alpha, beta));
}

double rayleigh_ratio(const std::string& inequality, const FundamentalSolution& fs,
                      const FieldPtr& u, double alpha, double beta, const Domain& dom,
                      const QuadratureScheme& sc, double eps0, int levels) {
    InequalityContext ctx(fs, dom, sc, eps0, levels);
    const int field = ctx.add_field(u, "trial");
    return rayleigh_ratio(inequality, ctx, field, alpha, beta);
}

SharpnessReport optimize_trial(const std::string& inequality, const TrialFamily& family,
                               const FundamentalSolution& fs, double alpha, double beta,
                               const Domain& dom, const QuadratureScheme& sc, int budget,
                               std::uint64_t seed, double eps0, int levels, double allowance) {
    require(budget >= 20, "optimize_trial: budget must allow at least 20 evaluations");
    const int d = family.params;
    require(d >= 1 && d <= 3, "optimize_trial: families carry 1 to 3 parameters");
    require(static_cast<int>(family.lo.size()) == d && static_cast<int>(family.hi.size()) == d,
            "optimize_trial: parameter box does not match params");
    for (int i = 0; i < d; ++i)
        require(family.lo[i] < family.hi[i], "optimize_trial: empty parameter box");
    require(static_cast<bool>(family.make), "optimize_trial: family has no generator");
    const double bound = ratio_lower_bound(inequality, alpha, beta);

    // One shared context: geometry is enumerated once, each restart cycles its
    // trial fields through its own slot.
    InequalityContext ctx(fs, dom, sc, eps0, levels);
    int slots[3];
    for (int r = 0; r < 3; ++r)
        slots[r] = ctx.add_field(constant_field(fs.frame().dim(), 0.0), "seed");

    struct Restart {
        std::vector<TraceEntry> trace;
        Point best_theta;
        double best = std::numeric_limits<double>::infinity();
        double margin = std::numeric_limits<double>::infinity();  // min of ratio - bound
        int evals = 0;
    };
    std::array<Restart, 3> rs;

    auto run = [&](int r, int cap) {
        Restart& out = rs[r];
        std::mt19937_64 gen(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(r + 1)));
        auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1.0p-53; };
        char label[32];
        std::snprintf(label, sizeof label, "trial-r%d", r);

        // Clamps theta into the box, evaluates the ratio, records the trace.
        // Degenerate or failing trials score +inf and the descent walks away
        // from them.
        auto evaluate = [&](Point& th) {
            for (int i = 0; i < d; ++i) th[i] = std::clamp(th[i], family.lo[i], family.hi[i]);
            double val = kInf;
            try {
                ctx.replace_field(slots[r],
                                  family.make(View(th.data(), static_cast<std::size_t>(d))),
                                  label);
                const double v = rayleigh_ratio(inequality, ctx, slots[r], alpha, beta);
                if (std::isfinite(v)) val = v;
            } catch (const std::exception&) {
            }
            if (val < out.best) {
                out.best = val;
                out.best_theta = th;
            }
            if (std::isfinite(val)) out.margin = std::min(out.margin, val - bound);
            TraceEntry te;
            te.restart = r;
            te.eval = out.evals;
            te.theta = th;
            te.ratio = val;
            te.best = out.best;
            out.trace.push_back(std::move(te));
            ++out.evals;
            return val;
        };

        std::vector<Point> X;
        std::vector<double> F;
        Point x0(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) x0[i] = family.lo[i] + unit() * (family.hi[i] - family.lo[i]);
        X.push_back(x0);
        F.push_back(evaluate(X[0]));
        for (int i = 0; i < d; ++i) {
            Point xi = x0;
            const double h = 0.25 * (family.hi[i] - family.lo[i]);
            xi[i] = xi[i] + h <= family.hi[i] ? xi[i] + h : xi[i] - h;
            X.push_back(xi);
            F.push_back(evaluate(X.back()));
            if (out.evals >= cap) return;
        }

        std::vector<int> ord(X.size());
        while (out.evals < cap) {
            std::iota(ord.begin(), ord.end(), 0);
            std::sort(ord.begin(), ord.end(), [&](int a, int b) { return F[a] < F[b]; });
            const int best = ord.front(), worst = ord.back(), second = ord[ord.size() - 2];
            if (std::isfinite(F[worst]) &&
                F[worst] - F[best] <= 1e-7 * std::max(1.0, std::abs(F[best])))
                break;
            Point c(static_cast<std::size_t>(d), 0.0);
            for (int v = 0; v < static_cast<int>(X.size()); ++v) {
                if (v == worst) continue;
                for (int i = 0; i < d; ++i) c[i] += X[v][i];
            }
            for (int i = 0; i < d; ++i) c[i] /= static_cast<double>(X.size() - 1);

            Point xr(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) xr[i] = c[i] + (c[i] - X[worst][i]);
            const double fr = evaluate(xr);
            if (fr < F[best]) {
                if (out.evals < cap) {
                    Point xe(static_cast<std::size_t>(d));
                    for (int i = 0; i < d; ++i) xe[i] = c[i] + 2.0 * (c[i] - X[worst][i]);
                    const double fe = evaluate(xe);
                    if (fe < fr) {
                        X[worst] = xe;
                        F[worst] = fe;
                        continue;
                    }
                }
                X[worst] = xr;
                F[worst] = fr;
            } else if (fr < F[second]) {
                X[worst] = xr;
                F[worst] = fr;
            } else if (out.evals < cap) {
                const bool outside = fr < F[worst];
                Point xc(static_cast<std::size_t>(d));
                for (int i = 0; i < d; ++i)
                    xc[i] = outside ? c[i] + 0.5 * (xr[i] - c[i])
                                    : c[i] - 0.5 * (c[i] - X[worst][i]);
                const double fc = evaluate(xc);
                if (outside ? fc <= fr : fc < F[worst]) {
                    X[worst] = xc;
                    F[worst] = fc;
                } else {
                    for (int v = 0; v < static_cast<int>(X.size()) && out.evals < cap; ++v) {
                        if (v == best) continue;
                        for (int i = 0; i < d; ++i)
                            X[v][i] = X[best][i] + 0.5 * (X[v][i] - X[best][i]);
                        F[v] = evaluate(X[v]);
                    }
                }
            }
        }
    };

    const int base = budget / 3, rem = budget % 3;
    std::array<std::string, 3> thread_error;
    {
        std::array<std::thread, 3> threads;
        for (int r = 0; r < 3; ++r) {
            const int cap = base + (r < rem ? 1 : 0);
            threads[r] = std::thread([&, r, cap] {
                try {
                    run(r, cap);
                } catch (const std::exception& e) {
                    thread_error[r] = e.what();
                } catch (...) {
                    thread_error[r] = "unknown error";
                }
            });
        }
        for (auto& t : threads) t.join();
    }
    for (const std::string& err : thread_error)
        if (!err.empty()) throw std::runtime_error("optimize_trial: " + err);

    SharpnessReport rep;
    rep.inequality = inequality;
    rep.family = family.description;
    rep.alpha = alpha;
    rep.beta = beta;
    rep.constant = bound;
    rep.seed = seed;
    rep.best_ratio = kInf;
    double margin = kInf;
    for (int r = 0; r < 3; ++r) {
        rep.restart_best[static_cast<std::size_t>(r)] = rs[r].best;
        rep.evaluations += rs[r].evals;
        rep.trace.insert(rep.trace.end(), rs[r].trace.begin(), rs[r].trace.end());
        if (rs[r].best < rep.best_ratio) {
            rep.best_ratio = rs[r].best;
            rep.best_theta = rs[r].best_theta;
        }
        margin = std::min(margin, rs[r].margin);
    }
    if (!std::isfinite(rep.best_ratio))
        throw std::runtime_error("optimize_trial: all evaluations degenerate");
    if (margin < -allowance) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "optimize_trial: a ratio fell %.3g below the theorem bound %.6g -- "
                      "quadrature too coarse for this family",
                      -margin, bound);
        throw std::runtime_error(buf);
    }
    return rep;
}

}  // namespace subell
