#include "subell/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

#include "subell/parallel.hpp"

namespace subell {

namespace {

double max_abs(std::initializer_list<double> xs) {
    double m = 1e-300;
    for (double x : xs) m = std::max(m, std::abs(x));
    return m;
}

[[noreturn]] void fail_parameters(const char* who, const char* constraint, double alpha,
                                  double beta) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: requires %s (got alpha = %g, beta = %g)", who, constraint,
                  alpha, beta);
    throw std::invalid_argument(buf);
}

// sum_k (X_k u) dens_k from a fused evaluation
double flux_density(const HorizontalEval& he, View dens) {
    double p = 0.0;
    for (int k = 0; k < he.N; ++k) p += he.Xu[k] * dens[k];
    return p;
}

void push_term(InequalityReport& rep, std::string label, double coefficient,
               std::array<double, 2> integral) {
    TermBreakdown t;
    t.label = std::move(label);
    t.coefficient = coefficient;
    t.integral = integral[0];
    t.value = coefficient * integral[0];
    t.error = std::abs(coefficient) * integral[1];
    rep.terms.push_back(std::move(t));
}

std::array<double, 2> product_of(std::array<double, 2> a, std::array<double, 2> b) {
    return {a[0] * b[0], std::abs(a[0]) * b[1] + std::abs(b[0]) * a[1]};
}

std::array<double, 2> square_of(std::array<double, 2> a) {
    return {a[0] * a[0], 2.0 * std::abs(a[0]) * a[1]};
}

}  // namespace

// ---------------------------------------------------------------------------
// Green / Stokes / representation residuals
// ---------------------------------------------------------------------------

ResidualReport green_first_residual(const Frame& fr, const FieldPtr& u, const FieldPtr& v,
                                    const Domain& dom, const QuadratureScheme& sc) {
    require(u && v, "green_first_residual: null field");
    const IntegralResult pair_term = integrate_interior(
        dom, sc, [&](View x) { return tilde_pairing(fr, *v, *u, x); });
    const IntegralResult vlu = integrate_interior(dom, sc, [&](View x) {
        HorizontalEval he;
        horizontal_eval(fr, *u, x, he, true);
        return v->value(x) * he.Lu;
    });
    const IntegralResult flux = integrate_boundary(fr, dom, sc, [&](View x, View dens) {
        HorizontalEval he;
        horizontal_eval(fr, *u, x, he, false);
        return v->value(x) * flux_density(he, dens);
    });
    ResidualReport rep;
    rep.residual = pair_term.value + vlu.value - flux.value;
    rep.scale = max_abs({pair_term.value, vlu.value, flux.value});
    rep.relative = rep.residual / rep.scale;
    return rep;
}

ResidualReport green_second_residual(const Frame& fr, const FieldPtr& u, const FieldPtr& v,
                                     const Domain& dom, const QuadratureScheme& sc) {
    require(u && v, "green_second_residual: null field");
    // one fused pass per side: u Lv - v Lu needs both laplacians at each node
    const IntegralResult interior = integrate_interior(dom, sc, [&](View x) {
        HorizontalEval hu, hv;
        horizontal_eval(fr, *u, x, hu, true);
        horizontal_eval(fr, *v, x, hv, true);
        return hu.u * hv.Lu - hv.u * hu.Lu;
    });
    const IntegralResult flux = integrate_boundary(fr, dom, sc, [&](View x, View dens) {
        HorizontalEval hu, hv;
        horizontal_eval(fr, *u, x, hu, false);
        horizontal_eval(fr, *v, x, hv, false);
        return hu.u * flux_density(hv, dens) - hv.u * flux_density(hu, dens);
    });
    ResidualReport rep;
    rep.residual = interior.value - flux.value;
    rep.scale = max_abs({interior.value, flux.value});
    rep.relative = rep.residual / rep.scale;
    return rep;
}

StokesReport stokes_residual(const Frame& fr, const std::vector<FieldPtr>& f, const Domain& dom,
                             const QuadratureScheme& sc) {
    require(static_cast<int>(f.size()) == fr.fields(),
            "stokes_residual: need one component per frame field");
    StokesReport rep;
    double total = 0.0;
    for (int k = 0; k < fr.fields(); ++k) {
        require(f[k] != nullptr, "stokes_residual: null component");
        const IntegralResult inter = integrate_interior(dom, sc, [&](View x) {
            HorizontalEval he;
            horizontal_eval(fr, *f[k], x, he, false);
            return he.Xu[k];
        });
        const IntegralResult bdry = integrate_boundary(
            fr, dom, sc, [&](View x, View dens) { return f[k]->value(x) * dens[k]; });
        rep.interior.push_back(inter.value);
        rep.boundary.push_back(bdry.value);
        rep.component_residual.push_back(inter.value - bdry.value);
        total += inter.value - bdry.value;
        rep.scale = std::max(rep.scale, max_abs({inter.value, bdry.value}));
    }
    rep.residual = total;
    rep.relative = rep.residual / rep.scale;
    return rep;
}

IntegralResult normalization_flux(const FundamentalSolution& fs, const Domain& dom,
                                  const QuadratureScheme& sc) {
    const double mu = 2.0 - fs.beta();
    const double c = fs.constant();
    return integrate_boundary(fs.frame(), dom, sc, [&](View x, View dens) {
        const double d = fs.gauge(x);
        std::array<double, kMaxDim> g{};
        fs.gauge_gradient(x, std::span<double>(g.data(), static_cast<std::size_t>(dens.size())));
        double pd = 0.0;
        for (std::size_t k = 0; k < dens.size(); ++k) pd += g[k] * dens[k];
        return c * mu * std::pow(d, 1.0 - fs.beta()) * pd;
    });
}

FundamentalSolution calibrate_constant(const FundamentalSolution& fs, const Domain& dom,
                                       const QuadratureScheme& sc) {
    Domain base = dom;
    if (!base.gauge) attach_pole(base, fs);
    require(base.pole_inside, "calibrate_constant: pole must lie strictly inside the domain");
    FundamentalSolution unit = fs;
    unit.set_constant(1.0);
    const IntegralResult flux = normalization_flux(unit, base, sc);
    require(std::abs(flux.value) >= 1e-12,
            "calibrate_constant: boundary flux is degenerate (|flux| < 1e-12)");
    const double c = -1.0 / flux.value;
    require(c > 0.0, "calibrate_constant: flux has the wrong sign for a positive constant");
    FundamentalSolution out = fs;
    out.set_constant(c);
    return out;
}

RepresentationReport representation_residual(const FundamentalSolution& fs, const FieldPtr& u,
                                             const Domain& dom, const QuadratureScheme& sc,
                                             double eps0, int levels) {
    require(u != nullptr, "representation_residual: null field");
    Domain base = dom;
    if (!base.gauge) attach_pole(base, fs);
    const Frame& fr = fs.frame();

    RepresentationReport rep;
    rep.value_at_pole = u->value(View(fs.pole()));

    const Integrand gamma_lu = [&](View x) {
        HorizontalEval he;
        horizontal_eval(fr, *u, x, he, true);
        return fs.gamma(x) * he.Lu;
    };
    if (base.pole_inside) {
        require(base.radial_gauge_aligned,
                "representation_residual: pole inside needs a gauge-aligned domain (ball)");
        const double e0 = eps0 > 0.0 ? eps0 : 0.2 * base.scale;
        rep.interior = excised_integral(base, fs, sc, gamma_lu, e0, levels).extrapolated;
    } else {
        rep.interior = integrate_interior(base, sc, gamma_lu).value;
    }

    const double mu = 2.0 - fs.beta();
    const double c = fs.constant();
    rep.flux_u = integrate_boundary(fr, base, sc, [&](View x, View dens) {
        const double d = fs.gauge(x);
        std::array<double, kMaxDim> g{};
        fs.gauge_gradient(x, std::span<double>(g.data(), static_cast<std::size_t>(dens.size())));
        double pd = 0.0;
        for (std::size_t k = 0; k < dens.size(); ++k) pd += g[k] * dens[k];
        return u->value(x) * c * mu * std::pow(d, 1.0 - fs.beta()) * pd;
    }).value;
    rep.flux_gamma = integrate_boundary(fr, base, sc, [&](View x, View dens) {
        HorizontalEval he;
        horizontal_eval(fr, *u, x, he, false);
        return fs.gamma(x) * flux_density(he, dens);
    }).value;

    rep.reconstructed = -rep.interior - rep.flux_u + rep.flux_gamma;
    rep.residual = rep.value_at_pole - rep.reconstructed;
    rep.scale = max_abs({rep.value_at_pole, rep.interior, rep.flux_u, rep.flux_gamma});
    rep.relative = rep.residual / rep.scale;
    return rep;
}

// ---------------------------------------------------------------------------
// Inequality parameter wedges
// ---------------------------------------------------------------------------

void validate_hardy_parameters(double alpha, double beta) {
    if (!(beta > 2.0)) fail_parameters("hardy", "beta > 2", alpha, beta);
    if (!(alpha > 2.0 - beta)) fail_parameters("hardy", "alpha > 2 - beta", alpha, beta);
}

void validate_uncertainty_parameters(double beta) {
    if (!(beta > 2.0)) fail_parameters("uncertainty", "beta > 2", 0.0, beta);
}

void validate_rellich_parameters(double alpha, double beta) {
    if (!(beta > 2.0)) fail_parameters("rellich", "beta > 2", alpha, beta);
    if (!(beta > alpha)) fail_parameters("rellich", "beta > alpha", alpha, beta);
    if (!(alpha > 4.0 - beta)) fail_parameters("rellich", "alpha > 4 - beta", alpha, beta);
}

void validate_rellich_gradient_parameters(double alpha, double beta) {
    if (!(beta > 2.0)) fail_parameters("rellich-grad", "beta > 2", alpha, beta);
    if (!(beta > alpha)) fail_parameters("rellich-grad", "beta > alpha", alpha, beta);
    if (!(alpha > (8.0 - beta) / 3.0))
        fail_parameters("rellich-grad", "alpha > (8 - beta) / 3", alpha, beta);
}

std::string verdict_for(double slack, double error_total) {
    if (slack >= -error_total) return "holds";
    if (slack >= -4.0 * error_total) return "violated_within_error";
    return "violated";
}

// ---------------------------------------------------------------------------
// InequalityContext
// ---------------------------------------------------------------------------

InequalityContext::InequalityContext(const FundamentalSolution& fs, const Domain& dom,
                                     const QuadratureScheme& sc, double eps0, int levels)
    : fs_(fs) {
    const Frame& fr = fs_.frame();
    require(dom.n == fr.dim(), "InequalityContext: domain/frame dimension mismatch");
    require(levels >= 2, "InequalityContext: need at least 2 excision levels");
    Domain base = dom;
    if (!base.gauge) attach_pole(base, fs_);
    require(base.excised_eps == 0.0,
            "InequalityContext: pass the unexcised domain; excision is handled internally");
    pole_inside_ = base.pole_inside;
    scheme_hash_ = sc.hash();

    const QuadratureScheme schemes[2] = {sc, coarser(sc)};

    // Boundary caches first: the excision scale keys off the closest boundary
    // node in gauge distance.
    double min_bd = std::numeric_limits<double>::infinity();
    double sup_d = 0.0;
    for (int r = 0; r < 2; ++r) {
        Resolution& res = res_[r];
        res.bn = boundary_nodes(fr, base, schemes[r]);
        const std::int64_t m = res.bn.count();
        const int nf = res.bn.nf;
        res.bd.resize(m);
        res.bpd.resize(m);
        parallel_for_index(m, [&](std::int64_t i) {
            const View x = res.bn.point(i);
            const View dens = res.bn.densities(i);
            res.bd[i] = fs_.gauge(x);
            std::array<double, kMaxDim> g{};
            fs_.gauge_gradient(x, std::span<double>(g.data(), static_cast<std::size_t>(nf)));
            double pd = 0.0;
            for (int k = 0; k < nf; ++k) pd += g[k] * dens[k];
            res.bpd[i] = pd;
        });
        for (std::int64_t i = 0; i < m; ++i) {
            min_bd = std::min(min_bd, res.bd[i]);
            sup_d = std::max(sup_d, res.bd[i]);
        }
    }

    double e0 = eps0;
    if (pole_inside_) {
        if (e0 <= 0.0) e0 = 0.2 * min_bd;
        require(e0 > 0.0 && e0 < min_bd,
                "InequalityContext: excision radius must stay strictly inside the domain");
    }

    double min_gs = std::numeric_limits<double>::infinity();
    for (int r = 0; r < 2; ++r) {
        Resolution& res = res_[r];
        if (!pole_inside_) {
            res.groups.groups.push_back(interior_nodes(base, schemes[r]));
        } else if (base.radial_gauge_aligned) {
            res.groups = excision_node_groups(base, fs_, schemes[r], e0, levels);
        } else {
            // No radial axis to clip: partition one plain enumeration into
            // gauge shells. Extrapolation quality then depends on how deep the
            // fixed nodes reach; trailing empty shells are trimmed so a stalled
            // tail is not mistaken for convergence.
            const NodeSet all = interior_nodes(base, schemes[r]);
            std::vector<double> eps(levels);
            for (int j = 0; j < levels; ++j) eps[j] = e0 * std::pow(0.5, j);
            std::vector<NodeSet> buckets(eps.size());
            for (auto& b : buckets) b.n = all.n;
            for (std::int64_t i = 0; i < all.count(); ++i) {
                const View x = all.point(i);
                const double d = fs_.gauge(x);
                if (d <= eps.back()) continue;  // inside every cut
                std::size_t j = 0;
                while (j + 1 < eps.size() && d <= eps[j]) ++j;
                buckets[j].x.insert(buckets[j].x.end(), x.begin(), x.end());
                buckets[j].w.push_back(all.w[i]);
            }
            while (buckets.size() > 2 && buckets.back().count() == 0) {
                buckets.pop_back();
                eps.pop_back();
            }
            if (buckets.size() < 2 || buckets[1].count() == 0) {
                NodeSet merged;
                merged.n = all.n;
                for (const NodeSet& b : buckets) {
                    merged.x.insert(merged.x.end(), b.x.begin(), b.x.end());
                    merged.w.insert(merged.w.end(), b.w.begin(), b.w.end());
                }
                res.groups.groups.push_back(std::move(merged));
            } else {
                res.groups.eps = std::move(eps);
                res.groups.groups = std::move(buckets);
            }
        }

        res.geo.resize(res.groups.groups.size());
        for (std::size_t g = 0; g < res.groups.groups.size(); ++g) {
            const NodeSet& ns = res.groups.groups[g];
            GroupArrays& geo = res.geo[g];
            const std::int64_t cnt = ns.count();
            geo.d.resize(cnt);
            geo.gs.resize(cnt);
            parallel_for_index(cnt, [&](std::int64_t i) {
                const View x = ns.point(i);
                geo.d[i] = fs_.gauge(x);
                geo.gs[i] = fs_.gauge_gradient_sq(x);
            });
            for (std::int64_t i = 0; i < cnt; ++i) {
                sup_d = std::max(sup_d, geo.d[i]);
                min_gs = std::min(min_gs, geo.gs[i]);
            }
        }
    }
    sup_d_ = sup_d;
    min_gs_ = std::isfinite(min_gs) ? min_gs : 0.0;
}

int InequalityContext::add_field(FieldPtr u, std::string label) {
    require(u != nullptr, "InequalityContext::add_field: null field");
    FieldCache fc;
    fc.label = std::move(label);
    fc.u = std::move(u);
    fields_.push_back(std::move(fc));
    fill_cache(fields_.back());
    return static_cast<int>(fields_.size()) - 1;
}

void InequalityContext::replace_field(int field, FieldPtr u, std::string label) {
    require(field >= 0 && field < field_count(), "InequalityContext::replace_field: bad handle");
    require(u != nullptr, "InequalityContext::replace_field: null field");
    FieldCache& fc = fields_[static_cast<std::size_t>(field)];
    fc.label = std::move(label);
    fc.u = std::move(u);
    fill_cache(fc);
}

void InequalityContext::fill_cache(FieldCache& fc) const {
    const Frame& fr = fs_.frame();
    for (int r = 0; r < 2; ++r) {
        const Resolution& res = res_[r];
        const std::size_t G = res.groups.groups.size();
        fc.u_[r].resize(G);
        fc.ugs_[r].resize(G);
        fc.lap_[r].resize(G);
        for (std::size_t g = 0; g < G; ++g) {
            const NodeSet& ns = res.groups.groups[g];
            const std::int64_t cnt = ns.count();
            fc.u_[r][g].resize(cnt);
            fc.ugs_[r][g].resize(cnt);
            fc.lap_[r][g].resize(cnt);
            auto& uu = fc.u_[r][g];
            auto& gg = fc.ugs_[r][g];
            auto& ll = fc.lap_[r][g];
            const ScalarField& field = *fc.u;
            parallel_for_index(cnt, [&](std::int64_t i) {
                HorizontalEval he;
                horizontal_eval(fr, field, ns.point(i), he, true);
                uu[i] = he.u;
                gg[i] = he.grad_sq();
                ll[i] = he.Lu;
            });
        }
        const std::int64_t m = res.bn.count();
        fc.bu_[r].resize(m);
        fc.bpu_[r].resize(m);
        auto& bu = fc.bu_[r];
        auto& bpu = fc.bpu_[r];
        const ScalarField& field = *fc.u;
        parallel_for_index(m, [&](std::int64_t i) {
            HorizontalEval he;
            horizontal_eval(fr, field, res.bn.point(i), he, false);
            bu[i] = he.u;
            bpu[i] = flux_density(he, res.bn.densities(i));
        });
    }
}

template <class Kernel>
std::array<double, 2> InequalityContext::interior_term(int field, Kernel&& kern) const {
    const FieldCache& fc = fields_.at(static_cast<std::size_t>(field));
    double vals[2] = {0.0, 0.0};
    double rich = 0.0;
    std::vector<double> buf;
    for (int r = 0; r < 2; ++r) {
        const Resolution& res = res_[r];
        std::vector<double> cum;
        cum.reserve(res.groups.groups.size());
        double acc = 0.0;
        for (std::size_t g = 0; g < res.groups.groups.size(); ++g) {
            const NodeSet& ns = res.groups.groups[g];
            const GroupArrays& geo = res.geo[g];
            const auto& uu = fc.u_[r][g];
            const auto& gg = fc.ugs_[r][g];
            const auto& ll = fc.lap_[r][g];
            const std::int64_t cnt = ns.count();
            buf.resize(static_cast<std::size_t>(cnt));
            parallel_for_index(cnt, [&](std::int64_t i) {
                buf[i] = ns.w[i] * kern(geo.d[i], geo.gs[i], uu[i], gg[i], ll[i]);
            });
            acc += pairwise_sum(std::span<const double>(buf.data(), static_cast<std::size_t>(cnt)));
            cum.push_back(acc);
        }
        if (res.groups.eps.empty()) {
            vals[r] = acc;
        } else {
            const ExcisionSequence seq = extrapolate_excision(res.groups.eps, std::move(cum));
            vals[r] = seq.extrapolated;
            if (r == 0) rich = seq.error;
        }
    }
    return {vals[0], std::abs(vals[0] - vals[1]) + rich};
}

template <class Kernel>
std::array<double, 2> InequalityContext::boundary_term(int field, Kernel&& kern) const {
    const FieldCache& fc = fields_.at(static_cast<std::size_t>(field));
    double vals[2] = {0.0, 0.0};
    std::vector<double> buf;
    for (int r = 0; r < 2; ++r) {
        const Resolution& res = res_[r];
        const std::int64_t m = res.bn.count();
        buf.resize(static_cast<std::size_t>(m));
        const auto& bu = fc.bu_[r];
        const auto& bpu = fc.bpu_[r];
        parallel_for_index(m, [&](std::int64_t i) {
            buf[i] = res.bn.w[i] * kern(res.bd[i], res.bpd[i], bu[i], bpu[i]);
        });
        vals[r] = pairwise_sum(std::span<const double>(buf.data(), static_cast<std::size_t>(m)));
    }
    return {vals[0], std::abs(vals[0] - vals[1])};
}

InequalityReport InequalityContext::start_report(std::string name, int field, double alpha,
                                                 double beta) const {
    InequalityReport rep;
    rep.inequality = std::move(name);
    rep.u_label = fields_.at(static_cast<std::size_t>(field)).label;
    rep.alpha = alpha;
    rep.beta = beta;
    rep.min_grad_gauge_sq = min_gs_;
    rep.sup_gauge = sup_d_;
    rep.scheme_hash = scheme_hash_;
    return rep;
}

void InequalityContext::finalize_report(InequalityReport& rep) const {
    rep.rhs = 0.0;
    rep.error_total = rep.lhs_error;
    for (const TermBreakdown& t : rep.terms) {
        rep.rhs += t.value;
        rep.error_total += t.error;
    }
    rep.slack = rep.lhs - rep.rhs;
    rep.verdict = verdict_for(rep.slack, rep.error_total);
}

double InequalityContext::auto_R(double beta) const { return resolve_R(beta, 0.0); }

double InequalityContext::resolve_R(double beta, double R) const {
    require(beta > 2.0, "refined weight: requires beta > 2");
    const double kappa = (2.0 - fs_.beta()) / (2.0 - beta);
    const double supD = std::pow(sup_d_, kappa);
    const double least = std::exp(1.0) * supD;
    if (R <= 0.0) return 1.05 * least;
    if (R < least * (1.0 - 1e-12)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "refined weight: requires R >= e * sup D = %g (got R = %g)", least, R);
        throw std::invalid_argument(buf);
    }
    return R;
}

InequalityReport InequalityContext::hardy(int field, double alpha, double beta, bool refined,
                                          double R) const {
    validate_hardy_parameters(alpha, beta);
    const double b0 = fs_.beta();
    const double k = (2.0 - b0) / (2.0 - beta);
    const double mu = 2.0 - b0;
    InequalityReport rep = start_report(refined ? "hardy-refined" : "hardy", field, alpha, beta);
    rep.R = refined ? resolve_R(beta, R) : 0.0;

    const auto lhs = interior_term(field, [=](double d, double, double, double ugs, double) {
        return std::pow(d, k * alpha) * ugs;
    });
    rep.lhs = lhs[0];
    rep.lhs_error = lhs[1];

    push_term(rep, "main", (beta + alpha - 2.0) * (beta + alpha - 2.0) / 4.0,
              interior_term(field, [=](double d, double gs, double u, double, double) {
                  return k * k * std::pow(d, k * alpha - 2.0) * gs * u * u;
              }));
    push_term(rep, "boundary", (beta + alpha - 2.0) / (2.0 * (beta - 2.0)),
              boundary_term(field, [=](double d, double pd, double u, double) {
                  return mu * std::pow(d, k * alpha - 1.0) * pd * u * u;
              }));
    if (refined) {
        const double lnR = std::log(rep.R);
        push_term(rep, "log-interior", 0.25,
                  interior_term(field, [=](double d, double gs, double u, double, double) {
                      const double L = lnR - k * std::log(d);
                      return k * k * std::pow(d, k * alpha - 2.0) * gs * u * u / (L * L);
                  }));
        push_term(rep, "log-boundary", 1.0 / (2.0 * (beta - 2.0)),
                  boundary_term(field, [=](double d, double pd, double u, double) {
                      const double L = lnR - k * std::log(d);
                      return mu * std::pow(d, k * alpha - 1.0) * pd * u * u / L;
                  }));
    }
    finalize_report(rep);
    return rep;
}

InequalityReport InequalityContext::uncertainty(int field, double beta, UncertaintyForm form,
                                                bool refined, double R) const {
    validate_uncertainty_parameters(beta);
    const double b0 = fs_.beta();
    const double k = (2.0 - b0) / (2.0 - beta);
    const double mu = 2.0 - b0;
    std::string name =
        form == UncertaintyForm::Weighted ? "uncertainty-weighted" : "uncertainty-plain";
    if (refined) name += "-refined";
    InequalityReport rep = start_report(std::move(name), field, 0.0, beta);
    rep.R = refined ? resolve_R(beta, R) : 0.0;

    // position factor: gauge-weighted mass (weighted form) or the
    // inverse-weight mass (plain form)
    const auto position =
        form == UncertaintyForm::Weighted
            ? interior_term(field,
                            [=](double d, double gs, double u, double, double) {
                                return k * k * std::pow(d, 4.0 * k - 2.0) * gs * u * u;
                            })
            : interior_term(field, [=](double d, double gs, double u, double, double) {
                  return d * d * u * u / (k * k * gs);
              });
    const auto momentum =
        interior_term(field, [](double, double, double, double ugs, double) { return ugs; });
    const auto lhs = product_of(position, momentum);
    rep.lhs = lhs[0];
    rep.lhs_error = lhs[1];

    const auto mass =
        form == UncertaintyForm::Weighted
            ? interior_term(field,
                            [=](double d, double gs, double u, double, double) {
                                return k * k * std::pow(d, 2.0 * k - 2.0) * gs * u * u;
                            })
            : interior_term(field, [](double, double, double u, double, double) { return u * u; });
    push_term(rep, "main", (beta - 2.0) * (beta - 2.0) / 4.0, square_of(mass));

    const auto bflux = boundary_term(field, [=](double d, double pd, double u, double) {
        return mu * pd * u * u / d;
    });
    push_term(rep, "boundary", 0.5, product_of(bflux, position));

    if (refined) {
        const double lnR = std::log(rep.R);
        const auto logi = interior_term(field, [=](double d, double gs, double u, double, double) {
            const double L = lnR - k * std::log(d);
            return k * k * gs * u * u / (d * d * L * L);
        });
        push_term(rep, "log-interior", 0.25, product_of(logi, position));
        const auto logb = boundary_term(field, [=](double d, double pd, double u, double) {
            const double L = lnR - k * std::log(d);
            return mu * pd * u * u / (d * L);
        });
        push_term(rep, "log-boundary", 1.0 / (2.0 * (beta - 2.0)), product_of(logb, position));
    }
    finalize_report(rep);
    return rep;
}

InequalityReport InequalityContext::rellich(int field, double alpha, double beta, bool refined,
                                            double R) const {
    validate_rellich_parameters(alpha, beta);
    const double b0 = fs_.beta();
    const double k = (2.0 - b0) / (2.0 - beta);
    const double mu = 2.0 - b0;
    InequalityReport rep =
        start_report(refined ? "rellich-refined" : "rellich", field, alpha, beta);
    rep.R = refined ? resolve_R(beta, R) : 0.0;

    const auto lhs = interior_term(field, [=](double d, double gs, double, double, double lap) {
        return std::pow(d, k * alpha - 2.0 * k + 2.0) * lap * lap / (k * k * gs);
    });
    rep.lhs = lhs[0];
    rep.lhs_error = lhs[1];

    const double ba4 = beta + alpha - 4.0;
    const double bma = beta - alpha;
    push_term(rep, "main", ba4 * ba4 * bma * bma / 16.0,
              interior_term(field, [=](double d, double gs, double u, double, double) {
                  return k * k * std::pow(d, k * (alpha - 2.0) - 2.0) * gs * u * u;
              }));
    push_term(rep, "boundary", ba4 * ba4 * bma / (4.0 * (beta - 2.0)),
              boundary_term(field, [=](double d, double pd, double u, double) {
                  return mu * std::pow(d, k * (alpha - 2.0) - 1.0) * pd * u * u;
              }));
    push_term(rep, "mixed-boundary", ba4 * bma / 4.0, c_functional(field, alpha, beta));
    if (refined) {
        const double lnR = std::log(rep.R);
        push_term(rep, "log-interior", ba4 * bma / 8.0,
                  interior_term(field, [=](double d, double gs, double u, double, double) {
                      const double L = lnR - k * std::log(d);
                      return k * k * std::pow(d, k * (alpha - 2.0) - 2.0) * gs * u * u / (L * L);
                  }));
        push_term(rep, "log-boundary", ba4 * bma / (4.0 * (beta - 2.0)),
                  boundary_term(field, [=](double d, double pd, double u, double) {
                      const double L = lnR - k * std::log(d);
                      return mu * std::pow(d, k * (alpha - 2.0) - 1.0) * pd * u * u / L;
                  }));
    }
    finalize_report(rep);
    return rep;
}

InequalityReport InequalityContext::rellich_gradient(int field, double alpha, double beta,
                                                     bool refined, double R) const {
    validate_rellich_gradient_parameters(alpha, beta);
    const double b0 = fs_.beta();
    const double k = (2.0 - b0) / (2.0 - beta);
    const double mu = 2.0 - b0;
    InequalityReport rep =
        start_report(refined ? "rellich-grad-refined" : "rellich-grad", field, alpha, beta);
    rep.R = refined ? resolve_R(beta, R) : 0.0;

    const auto lhs = interior_term(field, [=](double d, double gs, double, double, double lap) {
        return std::pow(d, k * alpha - 2.0 * k + 2.0) * lap * lap / (k * k * gs);
    });
    rep.lhs = lhs[0];
    rep.lhs_error = lhs[1];

    const double ba4 = beta + alpha - 4.0;
    const double bma = beta - alpha;
    const double b3a8 = beta + 3.0 * alpha - 8.0;
    push_term(rep, "main", bma * bma / 4.0,
              interior_term(field, [=](double d, double, double, double ugs, double) {
                  return std::pow(d, k * (alpha - 2.0)) * ugs;
              }));
    push_term(rep, "boundary", b3a8 * ba4 * bma / (8.0 * (beta - 2.0)),
              boundary_term(field, [=](double d, double pd, double u, double) {
                  return mu * std::pow(d, k * (alpha - 2.0) - 1.0) * pd * u * u;
              }));
    push_term(rep, "mixed-boundary", ba4 * bma / 4.0, c_functional(field, alpha, beta));
    if (refined) {
        const double lnR = std::log(rep.R);
        push_term(rep, "log-interior", b3a8 * bma / 16.0,
                  interior_term(field, [=](double d, double gs, double u, double, double) {
                      const double L = lnR - k * std::log(d);
                      return k * k * std::pow(d, k * (alpha - 2.0) - 2.0) * gs * u * u / (L * L);
                  }));
        push_term(rep, "log-boundary", b3a8 * bma / (8.0 * (beta - 2.0)),
                  boundary_term(field, [=](double d, double pd, double u, double) {
                      const double L = lnR - k * std::log(d);
                      return mu * std::pow(d, k * (alpha - 2.0) - 1.0) * pd * u * u / L;
                  }));
    }
    finalize_report(rep);
    return rep;
}

std::array<double, 2> InequalityContext::c_functional(int field, double alpha, double beta) const {
    require(beta != 2.0, "c_functional: beta = 2 is degenerate");
    const double b0 = fs_.beta();
    const double k = (2.0 - b0) / (2.0 - beta);
    const double mu = 2.0 - b0;
    const auto p1 = boundary_term(field, [=](double d, double pd, double u, double) {
        return mu * std::pow(d, k * (alpha - 2.0) - 1.0) * pd * u * u;
    });
    const auto p2 = boundary_term(field, [=](double d, double, double u, double pu) {
        return std::pow(d, k * (alpha - 2.0)) * u * pu;
    });
    const double c1 = (alpha - 2.0) / (2.0 - beta);
    return {c1 * p1[0] - 2.0 * p2[0], std::abs(c1) * p1[1] + 2.0 * p2[1]};
}

}  // namespace subell
