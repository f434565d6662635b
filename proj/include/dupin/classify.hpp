#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dupin/errors.hpp"
#include "dupin/immersion.hpp"
#include "dupin/rng.hpp"

// Runtime classifiers for curvature conditions on immersion charts:
// umbilicity class (number of principal-curvature clusters over the unit
// normal bundle), unipotency (cluster values constant over the bundle),
// constancy along parallel normal fields (CPC), and constancy of each
// principal curvature along its own curvature lines (Dupin).  All verdicts
// are sampled: a pass certifies the condition on the sampled sweep only.

namespace dupin {

// ---- sampling plans ----------------------------------------------------

struct SamplePlan {
    std::vector<Eigen::VectorXd> point_grid;
    // Per point, a covering of the unit sphere of normal coordinates that
    // contains -xi for every xi (transport and antipodal checks rely on it).
    std::vector<std::vector<Eigen::VectorXd>> normal_grid;
    int curve_count = 2;        // transport curves per point
    double curve_length = 0.5;  // parameter length of each transport curve
    std::uint64_t seed = 0;

    void validate(int n, int p) const {
        if (point_grid.empty()) throw contract_violation("SamplePlan: empty point grid");
        if (normal_grid.size() != point_grid.size())
            throw contract_violation("SamplePlan: normal grid size mismatch");
        for (const auto& u : point_grid)
            if (u.size() != n) throw contract_violation("SamplePlan: point dimension mismatch");
        for (const auto& list : normal_grid) {
            if (list.empty()) throw contract_violation("SamplePlan: empty normal list");
            for (const auto& w : list) {
                if (w.size() != p)
                    throw contract_violation("SamplePlan: normal dimension mismatch");
                if (std::abs(w.norm() - 1.0) > 1e-10)
                    throw contract_violation("SamplePlan: normal not unit");
            }
        }
        if (curve_count < 1) throw contract_violation("SamplePlan: curve_count < 1");
        if (!(curve_length > 0.0)) throw contract_violation("SamplePlan: curve_length <= 0");
    }
};

// Deterministic plan: equidistributed points, and per point an antipodally
// closed normal covering of at least max(2 p^2, 2) directions.
inline SamplePlan make_plan(const ImmersionChart& ch, int point_count = 24,
                            int normal_count = 0, std::uint64_t seed = 0x9d2fULL) {
    if (point_count < 1) throw contract_violation("make_plan: point_count < 1");
    const int p = ch.codim();
    if (p < 1) throw contract_violation("make_plan: chart has no normal directions");
    int m = normal_count > 0 ? normal_count : std::max(2 * p * p, 2);
    if (m % 2 != 0) ++m;
    SamplePlan plan;
    plan.seed = seed;
    plan.point_grid = box_covering(ch.domain_lo, ch.domain_hi, point_count, seed);
    plan.normal_grid.reserve(plan.point_grid.size());
    std::uint64_t mix = seed;
    for (std::size_t i = 0; i < plan.point_grid.size(); ++i)
        plan.normal_grid.push_back(sphere_covering(p, m, splitmix64(mix)));
    return plan;
}

// ---- verdicts ----------------------------------------------------------

// Tri-state outcome: residuals within the tolerance pass, residuals beyond
// ten times it fail, and the band between is reported as inconclusive
// rather than rounded either way.
enum class Verdict { pass, fail, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        default: return "inconclusive";
    }
}

inline Verdict verdict_from_residual(double residual, double tol) {
    if (residual <= tol) return Verdict::pass;
    if (residual >= 10.0 * tol) return Verdict::fail;
    return Verdict::inconclusive;
}

struct Witness {
    Eigen::VectorXd point;
    Eigen::VectorXd normal;  // frame coordinates
    double residual = 0.0;
    std::string detail;
};

struct VerdictEntry {
    bool evaluated = false;
    Verdict verdict = Verdict::inconclusive;
    double residual = 0.0;
    double tol = 0.0;
    std::string reason;
    std::optional<Witness> witness;
};

struct ClassificationReport {
    std::string chart_name;
    int n = 0;
    int p = 0;
    double cluster_tol = 0.0;
    double constancy_tol = 0.0;

    int k_observed = 0;   // cluster count when constant over the sweep
    bool k_varies = false;
    int weak_k = 0;       // max cluster count over the sweep
    std::vector<int> multiplicities;  // empty when they vary

    double constancy_residual = 0.0;  // max cluster-value variation over the sweep

    // Shared-eigenvalue implication for 2-umbilical charts with p >= 2: a
    // cluster constant over the whole bundle forces the spectrum {+k, -k}.
    bool shared_value_detected = false;
    double shared_value = 0.0;
    double opposite_pair_residual = 0.0;

    std::optional<double> antipodal_residual;  // codim >= 2 only
    int truncated_curves = 0;

    VerdictEntry umbilical;
    VerdictEntry weakly_umbilical;
    VerdictEntry unipotent;
    VerdictEntry cpc;
    VerdictEntry dupin;

    bool nesting_consistent = true;  // unipotent => CPC => Dupin, up to inconclusive
};

// Constancy tolerance tracks the jet noise floor, like cluster tolerances.
inline double constancy_tol(const ImmersionChart& ch) {
    return ch.has_analytic_jet() ? 1e-6 : 1e-4;
}

// ---- spectrum sweeps ---------------------------------------------------

namespace detail {

struct SweepSample {
    int point_index = 0;
    Eigen::VectorXd normal;       // frame coordinates actually used
    std::vector<double> values;   // cluster means, ascending
    std::vector<int> mults;
};

struct SweepData {
    std::vector<SweepSample> samples;
    std::vector<FundamentalForms> forms;  // one per grid point
    int min_clusters = 0;
    int max_clusters = 0;
    bool mults_constant = true;
};

// For hypersurfaces the unit normal bundle has two sheets and the
// Gram-Schmidt orientation is arbitrary per point, so +nu and -nu carry the
// same information with negated-and-reversed spectra.  Each point
// contributes one canonical sample: the orientation whose sorted value
// vector is lexicographically larger.  For p >= 2 the bundle is connected
// and every normal is swept as given.
inline SweepData run_sweep(const ImmersionChart& ch, const SamplePlan& plan,
                           double cluster_tol) {
    const int p = ch.codim();
    plan.validate(ch.intrinsic_dim, p);
    SweepData data;
    data.forms.reserve(plan.point_grid.size());
    data.min_clusters = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < plan.point_grid.size(); ++i) {
        data.forms.push_back(fundamental_forms(ch, plan.point_grid[i]));
        const FundamentalForms& ff = data.forms.back();
        auto record = [&](const Eigen::VectorXd& w) {
            const ShapeSpectrum sp = principal_spectrum(ff, w, cluster_tol);
            SweepSample s;
            s.point_index = static_cast<int>(i);
            s.normal = w;
            s.values = sp.cluster_values();
            s.mults = sp.multiplicities();
            return s;
        };
        if (p == 1) {
            SweepSample plus = record(Eigen::VectorXd::Constant(1, 1.0));
            SweepSample minus = record(Eigen::VectorXd::Constant(1, -1.0));
            data.samples.push_back(
                std::lexicographical_compare(plus.values.begin(), plus.values.end(),
                                             minus.values.begin(), minus.values.end())
                    ? std::move(minus)
                    : std::move(plus));
        } else {
            for (const auto& w : plan.normal_grid[i]) data.samples.push_back(record(w));
        }
    }
    for (const auto& s : data.samples) {
        const int k = static_cast<int>(s.values.size());
        data.min_clusters = std::min(data.min_clusters, k);
        data.max_clusters = std::max(data.max_clusters, k);
        if (s.mults != data.samples.front().mults) data.mults_constant = false;
    }
    return data;
}

inline ClassificationReport base_report(const ImmersionChart& ch, const SweepData& sweep,
                                        double cluster_tol) {
    ClassificationReport rep;
    rep.chart_name = ch.name;
    rep.n = ch.intrinsic_dim;
    rep.p = ch.codim();
    rep.cluster_tol = cluster_tol;
    rep.constancy_tol = constancy_tol(ch);
    rep.k_varies = sweep.min_clusters != sweep.max_clusters;
    rep.weak_k = sweep.max_clusters;
    rep.k_observed = sweep.max_clusters;
    if (!rep.k_varies && sweep.mults_constant) rep.multiplicities = sweep.samples.front().mults;

    rep.umbilical.evaluated = true;
    rep.umbilical.tol = 0.0;
    rep.umbilical.residual = static_cast<double>(sweep.max_clusters - sweep.min_clusters);
    if (!rep.k_varies) {
        rep.umbilical.verdict = Verdict::pass;
        rep.umbilical.reason =
            "cluster count " + std::to_string(sweep.max_clusters) + " at every sample";
    } else {
        rep.umbilical.verdict = Verdict::fail;
        rep.umbilical.reason = "cluster count varies between " +
                               std::to_string(sweep.min_clusters) + " and " +
                               std::to_string(sweep.max_clusters);
        for (const auto& s : sweep.samples) {
            if (static_cast<int>(s.values.size()) == sweep.min_clusters) {
                Witness w;
                w.point = sweep.forms[s.point_index].u;
                w.normal = s.normal;
                w.residual = rep.umbilical.residual;
                w.detail = "sample with " + std::to_string(s.values.size()) + " cluster(s)";
                rep.umbilical.witness = std::move(w);
                break;
            }
        }
    }

    rep.weakly_umbilical.evaluated = true;
    rep.weakly_umbilical.verdict = Verdict::pass;
    rep.weakly_umbilical.tol = 0.0;
    rep.weakly_umbilical.reason =
        "at most " + std::to_string(rep.weak_k) + " clusters across the sweep";
    return rep;
}

inline void vacuous_fail(VerdictEntry& entry, const std::string& which) {
    entry.evaluated = true;
    entry.verdict = Verdict::fail;
    entry.reason = which + " requires a constant cluster count; umbilicity varies (vacuous)";
}

// ---- parallel transport ------------------------------------------------

// A parallel normal field along a curve satisfies, in ambient coordinates,
// xi' = f_*(A_xi u') under this library's shape-operator sign (from
// <nu, f_i> = 0: the tangential part of d nu is +f_*(A nu)): the derivative
// of a parallel field has no normal component and its position component
// vanishes because xi stays tangent to the space form.  Working with the
// ambient vector keeps the field smooth across Gram-Schmidt pivot changes,
// where per-point frames rotate discontinuously.

// Frame coordinates of an ambient normal vector.  The norm measures how
// much of the vector still lies in the normal space; transport monitors it.
inline Eigen::VectorXd frame_coordinates(const FundamentalForms& ff,
                                         const Eigen::VectorXd& weights,
                                         const Eigen::VectorXd& xi) {
    return ff.normal_frame.transpose() * weights.asDiagonal() * xi;
}

// f_*(A_xi du) for an ambient normal vector xi, from the stored frame
// decomposition of the second fundamental form.
inline Eigen::VectorXd weingarten_velocity(const FundamentalForms& ff,
                                           const Eigen::VectorXd& weights,
                                           const Eigen::VectorXd& xi,
                                           const Eigen::VectorXd& du) {
    const Eigen::VectorXd w = frame_coordinates(ff, weights, xi);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(ff.n(), ff.n());
    for (int a = 0; a < ff.p(); ++a) s += w(a) * ff.second_form[a];
    return ff.jacobian * ff.metric.llt().solve(s * du);
}

// A transport curve: two smooth arcs joined at a corner, scaled to stay
// inside the chart domain.  Arc shapes are drawn from the plan seed.  The
// corner position lets integrators split the parameter range so no RK4
// stage straddles the velocity jump.
struct TransportCurve {
    Eigen::VectorXd u0;
    double length = 0.0;
    double corner = 0.0;
    std::function<Eigen::VectorXd(double)> at;        // u(s)
    std::function<Eigen::VectorXd(double)> velocity;  // u'(s); one-sided at the corner
};

inline TransportCurve make_transport_curve(const ImmersionChart& ch, const Eigen::VectorXd& u0,
                                           double length, Rng& rng) {
    const int n = ch.intrinsic_dim;
    struct Arc {
        Eigen::VectorXd d, e;
        double amp = 0.0, omega = 0.0;
    };
    const double half = 0.5 * length;
    auto draw_arc = [&]() {
        Arc a;
        a.d = rng.unit_vector(n);
        a.e = rng.unit_vector(n);
        a.amp = 0.15 * length;
        a.omega = 2.0 * M_PI / std::max(half, 1e-12);
        return a;
    };
    const Arc a1 = draw_arc();
    const Arc a2 = draw_arc();

    auto raw = [=](double s) -> Eigen::VectorXd {
        if (s <= half) return s * a1.d + a1.amp * (1.0 - std::cos(a1.omega * s)) * a1.e;
        const Eigen::VectorXd knee =
            half * a1.d + a1.amp * (1.0 - std::cos(a1.omega * half)) * a1.e;
        const double t = s - half;
        return knee + t * a2.d + a2.amp * (1.0 - std::cos(a2.omega * t)) * a2.e;
    };
    auto raw_vel = [=](double s) -> Eigen::VectorXd {
        if (s <= half) return a1.d + a1.amp * a1.omega * std::sin(a1.omega * s) * a1.e;
        const double t = s - half;
        return a2.d + a2.amp * a2.omega * std::sin(a2.omega * t) * a2.e;
    };

    // Componentwise worst excursion over a dense parameter grid decides the
    // shrink factor that keeps the curve strictly inside the domain box.
    double scale = 1.0;
    const int probes = 128;
    Eigen::VectorXd maxdev = Eigen::VectorXd::Zero(n);
    for (int k = 1; k <= probes; ++k)
        maxdev = maxdev.cwiseMax(raw(length * k / probes).cwiseAbs());
    for (int j = 0; j < n; ++j) {
        const double room =
            0.9 * std::min(u0(j) - ch.domain_lo(j), ch.domain_hi(j) - u0(j));
        if (maxdev(j) > 1e-12) scale = std::min(scale, std::max(room, 0.0) / maxdev(j));
    }

    TransportCurve curve;
    curve.u0 = u0;
    curve.length = length;
    curve.corner = half;
    curve.at = [=](double s) -> Eigen::VectorXd { return u0 + scale * raw(s); };
    curve.velocity = [=](double s) -> Eigen::VectorXd { return scale * raw_vel(s); };
    return curve;
}

// Parallel normal transport along a fixed curve (RK4 on the ambient field),
// reporting the spectrum drift at checkpoints.  Losing unit norm, or
// leaking out of the normal space, beyond 1e-6 halves the step, up to ten
// times, then aborts.
struct TransportResult {
    double max_drift = 0.0;
    double worst_s = 0.0;
};

inline TransportResult transport_constancy(const ImmersionChart& ch,
                                           const TransportCurve& curve,
                                           const Eigen::VectorXd& w0, double cluster_tol,
                                           double rk_step) {
    const Eigen::VectorXd weights = ch.ambient_weights();
    const FundamentalForms ff0 = fundamental_forms(ch, curve.at(0.0));
    const Eigen::VectorXd xi0 = ff0.normal_frame * w0;

    for (int halving = 0;; ++halving) {
        const double h = rk_step / static_cast<double>(1 << halving);
        const int steps = static_cast<int>(std::ceil(curve.length / h));
        const int checkpoint_every = std::max(1, steps / 20);

        Eigen::VectorXd xi = xi0;
        std::vector<double> start_values;
        TransportResult result;
        bool drifted = false;

        auto checkpoint = [&](const FundamentalForms& ff, const Eigen::VectorXd& v,
                              double s) -> bool {
            Eigen::VectorXd w = frame_coordinates(ff, weights, v);
            if (std::abs(w.norm() - 1.0) > 1e-6) return false;  // leaked; halve
            w /= w.norm();
            const ShapeSpectrum sp = principal_spectrum(ff, w, cluster_tol);
            const auto values = sp.cluster_values();
            if (start_values.empty()) {
                start_values = values;
                return true;
            }
            for (double v0 : start_values) {
                double best = std::numeric_limits<double>::infinity();
                for (double vv : values) best = std::min(best, std::abs(vv - v0));
                if (best > result.max_drift) {
                    result.max_drift = best;
                    result.worst_s = s;
                }
            }
            return true;
        };

        if (!checkpoint(ff0, xi, 0.0))
            throw contract_violation("transport_constancy: initial normal not unit");
        FundamentalForms ff_start = ff0;
        // Segment boundaries at the corner keep each RK4 step on one smooth
        // arc; velocities at a boundary are read from the segment interior.
        const double segment_ends[2] = {std::min(curve.corner, curve.length), curve.length};
        double s = 0.0;
        int done_steps = 0;
        for (double segment_end : segment_ends) {
            while (s < segment_end - 1e-12 && !drifted) {
                const double hk = std::min(h, segment_end - s);
                auto vel = [&](double sq) {
                    return curve.velocity(std::clamp(sq, s + 1e-9 * hk, segment_end - 1e-9 * hk));
                };
                const FundamentalForms ff_mid = fundamental_forms(ch, curve.at(s + 0.5 * hk));
                const FundamentalForms ff_end = fundamental_forms(ch, curve.at(s + hk));
                const Eigen::VectorXd k1 = weingarten_velocity(ff_start, weights, xi, vel(s));
                const Eigen::VectorXd k2 =
                    weingarten_velocity(ff_mid, weights, xi + 0.5 * hk * k1, vel(s + 0.5 * hk));
                const Eigen::VectorXd k3 =
                    weingarten_velocity(ff_mid, weights, xi + 0.5 * hk * k2, vel(s + 0.5 * hk));
                const Eigen::VectorXd k4 =
                    weingarten_velocity(ff_end, weights, xi + hk * k3, vel(s + hk));
                xi += (hk / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                ff_start = ff_end;
                s += hk;
                ++done_steps;
                const double q =
                    std::sqrt(std::abs((weights.array() * xi.array() * xi.array()).sum()));
                if (std::abs(q - 1.0) > 1e-6) {
                    drifted = true;
                    break;
                }
                if (done_steps % checkpoint_every == 0 || s >= curve.length - 1e-12) {
                    if (!checkpoint(ff_end, xi, s)) drifted = true;
                }
            }
            if (drifted) break;
        }
        if (!drifted) return result;
        if (halving >= 10)
            throw integrator_failure(
                "transport_constancy: unit norm lost after ten step halvings");
    }
}

}  // namespace detail

// ---- umbilicity --------------------------------------------------------

// Counts principal-curvature clusters over the sampled unit normal bundle.
// k-umbilical: the count is the same at every sample; weakly: the maximum
// count bounds the spectrum everywhere.
inline ClassificationReport umbilicity_class(const ImmersionChart& ch, const SamplePlan& plan) {
    const double cluster_tol = ch.default_cluster_tol();
    const detail::SweepData sweep = detail::run_sweep(ch, plan, cluster_tol);
    return detail::base_report(ch, sweep, cluster_tol);
}

// ---- unipotency --------------------------------------------------------

// Cluster values constant over the whole sampled bundle.  On 2-umbilical
// charts with p >= 2, a cluster constant across all normals additionally
// forces the spectrum {+k, -k}; the report carries that residual.
inline ClassificationReport unipotent_check(const ImmersionChart& ch, const SamplePlan& plan,
                                            double tol = 0.0) {
    const double cluster_tol = ch.default_cluster_tol();
    const detail::SweepData sweep = detail::run_sweep(ch, plan, cluster_tol);
    ClassificationReport rep = detail::base_report(ch, sweep, cluster_tol);
    if (tol > 0.0) rep.constancy_tol = tol;
    if (rep.k_varies) {
        detail::vacuous_fail(rep.unipotent, "unipotency");
        return rep;
    }

    const int k = rep.k_observed;
    std::vector<double> lo(k, std::numeric_limits<double>::infinity());
    std::vector<double> hi(k, -std::numeric_limits<double>::infinity());
    std::vector<double> mean(k, 0.0);
    for (const auto& s : sweep.samples)
        for (int i = 0; i < k; ++i) {
            lo[i] = std::min(lo[i], s.values[i]);
            hi[i] = std::max(hi[i], s.values[i]);
            mean[i] += s.values[i];
        }
    for (int i = 0; i < k; ++i) mean[i] /= static_cast<double>(sweep.samples.size());

    int worst_cluster = 0;
    rep.constancy_residual = 0.0;
    for (int i = 0; i < k; ++i)
        if (hi[i] - lo[i] > rep.constancy_residual) {
            rep.constancy_residual = hi[i] - lo[i];
            worst_cluster = i;
        }

    rep.unipotent.evaluated = true;
    rep.unipotent.tol = rep.constancy_tol;
    rep.unipotent.residual = rep.constancy_residual;
    rep.unipotent.verdict = verdict_from_residual(rep.constancy_residual, rep.constancy_tol);
    rep.unipotent.reason = "max cluster-value variation over the sweep";
    if (rep.unipotent.verdict != Verdict::pass) {
        for (const auto& s : sweep.samples) {
            const double dev = std::abs(s.values[worst_cluster] - mean[worst_cluster]);
            if (!rep.unipotent.witness || dev > rep.unipotent.witness->residual) {
                Witness w;
                w.point = sweep.forms[s.point_index].u;
                w.normal = s.normal;
                w.residual = dev;
                w.detail = "cluster " + std::to_string(worst_cluster) + " deviates from mean " +
                           std::to_string(mean[worst_cluster]);
                rep.unipotent.witness = std::move(w);
            }
        }
    }

    if (k == 2 && rep.p >= 2) {
        for (int i = 0; i < 2; ++i) {
            if (hi[i] - lo[i] > rep.constancy_tol) continue;
            rep.shared_value_detected = true;
            rep.shared_value = mean[i];
            rep.opposite_pair_residual = 0.0;
            for (const auto& s : sweep.samples)
                rep.opposite_pair_residual = std::max(
                    rep.opposite_pair_residual, std::abs(s.values[1 - i] + mean[i]));
            break;
        }
    }
    return rep;
}

// ---- antipodal spectral symmetry ---------------------------------------

// For codimension >= 2: the spectrum at -xi is the negated reversal of the
// spectrum at xi, multiplicities of 2-cluster samples agree, and n is even.
// Returns the worst eigenvalue-level residual over the sweep; umbilic
// directions (single cluster) are skipped.
inline double antipodal_symmetry_check(const ImmersionChart& ch, const SamplePlan& plan) {
    const int p = ch.codim();
    if (p < 2)
        throw not_applicable("antipodal_symmetry_check: requires codimension >= 2");
    plan.validate(ch.intrinsic_dim, p);
    const double cluster_tol = ch.default_cluster_tol();
    const int n = ch.intrinsic_dim;

    double residual = 0.0;
    for (std::size_t i = 0; i < plan.point_grid.size(); ++i) {
        const FundamentalForms ff = fundamental_forms(ch, plan.point_grid[i]);
        const auto& normals = plan.normal_grid[i];
        for (const auto& xi : normals) {
            const ShapeSpectrum plus = principal_spectrum(ff, xi, cluster_tol);
            const ShapeSpectrum minus = principal_spectrum(ff, Eigen::VectorXd(-xi), cluster_tol);
            for (int j = 0; j < n; ++j)
                residual = std::max(residual, std::abs(minus.eigenvalues(j) +
                                                       plus.eigenvalues(n - 1 - j)));
            if (plus.clusters.size() == 2) {
                if (plus.clusters[0].multiplicity != plus.clusters[1].multiplicity)
                    throw contract_violation(
                        "antipodal_symmetry_check: unequal multiplicities " +
                        std::to_string(plus.clusters[0].multiplicity) + " vs " +
                        std::to_string(plus.clusters[1].multiplicity));
                if (n % 2 != 0)
                    throw contract_violation(
                        "antipodal_symmetry_check: odd dimension with a split spectrum");
            }
        }
    }
    return residual;
}

// ---- constancy along parallel normal fields ----------------------------

// Transports random unit normals along random piecewise-smooth curves from
// every grid point and checks that every cluster value is constant along
// each transported field.
inline ClassificationReport cpc_check(const ImmersionChart& ch, const SamplePlan& plan,
                                      double tol = 0.0, double rk_step = 1e-3) {
    const double cluster_tol = ch.default_cluster_tol();
    const detail::SweepData sweep = detail::run_sweep(ch, plan, cluster_tol);
    ClassificationReport rep = detail::base_report(ch, sweep, cluster_tol);
    if (rep.k_varies) {
        detail::vacuous_fail(rep.cpc, "the CPC condition");
        return rep;
    }
    if (tol <= 0.0) tol = rep.constancy_tol;

    const int p = ch.codim();
    Rng rng(plan.seed ^ 0xc0ffeeULL);
    double residual = 0.0;
    for (std::size_t i = 0; i < plan.point_grid.size(); ++i) {
        for (int c = 0; c < plan.curve_count; ++c) {
            Rng curve_rng(rng.fork());
            const detail::TransportCurve curve = detail::make_transport_curve(
                ch, plan.point_grid[i], plan.curve_length, curve_rng);
            const Eigen::VectorXd w0 =
                p == 1 ? Eigen::VectorXd::Constant(1, 1.0) : curve_rng.unit_vector(p);
            const detail::TransportResult r =
                detail::transport_constancy(ch, curve, w0, cluster_tol, rk_step);
            if (r.max_drift > residual) {
                residual = r.max_drift;
                Witness w;
                w.point = plan.point_grid[i];
                w.normal = w0;
                w.residual = r.max_drift;
                w.detail = "curve " + std::to_string(c) + ", worst drift at s = " +
                           std::to_string(r.worst_s);
                rep.cpc.witness = std::move(w);
            }
        }
    }

    rep.cpc.evaluated = true;
    rep.cpc.tol = tol;
    rep.cpc.residual = residual;
    rep.cpc.verdict = verdict_from_residual(residual, tol);
    rep.cpc.reason = "max cluster-value drift along transported normal fields";
    if (rep.cpc.verdict == Verdict::pass) rep.cpc.witness.reset();
    return rep;
}

// ---- constancy along curvature lines -----------------------------------

// From each sampled (u, xi) and each cluster, integrates the coupled
// curvature-line system: the base point follows a unit eigenvector of the
// cluster (continued by maximal inner product) while the normal is
// parallel-transported, and the cluster value is tracked for drift.
// Cluster collisions along a curve truncate it and are flagged, not fatal.
inline ClassificationReport dupin_check(const ImmersionChart& ch, const SamplePlan& plan,
                                        double tol = 0.0, double rk_step = 1e-3) {
    const double cluster_tol = ch.default_cluster_tol();
    const detail::SweepData sweep = detail::run_sweep(ch, plan, cluster_tol);
    ClassificationReport rep = detail::base_report(ch, sweep, cluster_tol);
    if (rep.k_varies) {
        detail::vacuous_fail(rep.dupin, "the Dupin condition");
        return rep;
    }
    if (tol <= 0.0) tol = rep.constancy_tol;

    const int n = ch.intrinsic_dim;
    const int p = ch.codim();
    const int k = rep.k_observed;
    const Eigen::VectorXd weights = ch.ambient_weights();

    // A few normals per point bound the integration budget; antipodal
    // pairing of the covering is preserved by taking index pairs (j, j+half).
    auto chosen_normals = [&](const std::vector<Eigen::VectorXd>& list) {
        std::vector<Eigen::VectorXd> out;
        const int half = static_cast<int>(list.size()) / 2;
        const int want = std::max(1, (plan.curve_count + 1) / 2);
        for (int j = 0; j < half && static_cast<int>(out.size()) < 2 * want; ++j) {
            out.push_back(list[j]);
            out.push_back(list[j + half]);
        }
        if (out.empty()) out.push_back(list.front());
        return out;
    };

    struct Derivative {
        Eigen::VectorXd du;
        Eigen::VectorXd dxi;
        double value = 0.0;
        bool collided = false;
    };
    // Evaluates the coupled right-hand side with continuation references
    // fixed at the step start; xi is the ambient normal vector.
    auto rhs = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& xi,
                   const Eigen::VectorXd& x_ref, double kappa_ref) {
        Derivative d;
        const FundamentalForms ff = fundamental_forms(ch, u);
        Eigen::VectorXd w = detail::frame_coordinates(ff, weights, xi);
        if (std::abs(w.norm() - 1.0) > 1e-6)
            throw integrator_failure("dupin_check: transported normal left the normal space");
        w /= w.norm();
        const ShapeSpectrum sp = principal_spectrum(ff, w, cluster_tol);

        int best = 0;
        for (std::size_t j = 1; j < sp.clusters.size(); ++j)
            if (std::abs(sp.clusters[j].value - kappa_ref) <
                std::abs(sp.clusters[best].value - kappa_ref))
                best = static_cast<int>(j);
        d.value = sp.clusters[best].value;
        const bool merged = static_cast<int>(sp.clusters.size()) != k;
        const bool drifted_off = std::abs(d.value - kappa_ref) > 10.0 * cluster_tol + 0.1;
        if (merged || drifted_off) {
            d.collided = true;
            return d;
        }

        const SpectrumCluster& cl = sp.clusters[best];
        const Eigen::MatrixXd basis = sp.eigenbasis.middleCols(cl.first, cl.multiplicity);
        Eigen::VectorXd coef = basis.transpose() * ff.metric * x_ref;
        if (coef.norm() < 1e-3) {
            d.collided = true;  // continuation lost its eigendirection
            return d;
        }
        Eigen::VectorXd x = basis * coef;
        x /= std::sqrt(x.dot(ff.metric * x));
        const double align = x.dot(ff.metric * x_ref);
        if (align < 0.0) x = -x;
        else if (align == 0.0) {
            for (int j = 0; j < x.size(); ++j)
                if (x(j) != 0.0) {
                    if (x(j) < 0.0) x = -x;
                    break;
                }
        }
        d.du = x;
        d.dxi = detail::weingarten_velocity(ff, weights, xi, x);
        return d;
    };

    double residual = 0.0;
    for (std::size_t i = 0; i < plan.point_grid.size(); ++i) {
        const Eigen::VectorXd u0 = plan.point_grid[i];
        for (const Eigen::VectorXd& xi0 : chosen_normals(plan.normal_grid[i])) {
            const FundamentalForms ff0 = fundamental_forms(ch, u0);
            const ShapeSpectrum sp0 = principal_spectrum(ff0, xi0, cluster_tol);
            if (static_cast<int>(sp0.clusters.size()) != k) {
                ++rep.truncated_curves;
                continue;
            }
            const FundamentalForms ff_start = fundamental_forms(ch, u0);
            for (int ci = 0; ci < k; ++ci) {
                const SpectrumCluster& cl0 = sp0.clusters[ci];
                const double kappa0 = cl0.value;
                Eigen::VectorXd u = u0;
                Eigen::VectorXd xi = ff_start.normal_frame * xi0;
                Eigen::VectorXd x_ref = sp0.eigenbasis.col(cl0.first);
                double kappa_ref = kappa0;
                const int steps =
                    static_cast<int>(std::ceil(plan.curve_length / rk_step));
                bool truncated = false;
                double curve_residual = 0.0;
                for (int step = 0; step < steps && !truncated; ++step) {
                    const double h = std::min(rk_step, plan.curve_length - step * rk_step);
                    const Derivative d1 = rhs(u, xi, x_ref, kappa_ref);
                    if (d1.collided) { truncated = true; break; }
                    const Derivative d2 =
                        rhs(u + 0.5 * h * d1.du, xi + 0.5 * h * d1.dxi, x_ref, kappa_ref);
                    if (d2.collided) { truncated = true; break; }
                    const Derivative d3 =
                        rhs(u + 0.5 * h * d2.du, xi + 0.5 * h * d2.dxi, x_ref, kappa_ref);
                    if (d3.collided) { truncated = true; break; }
                    const Derivative d4 = rhs(u + h * d3.du, xi + h * d3.dxi, x_ref, kappa_ref);
                    if (d4.collided) { truncated = true; break; }
                    u += (h / 6.0) * (d1.du + 2.0 * d2.du + 2.0 * d3.du + d4.du);
                    xi += (h / 6.0) * (d1.dxi + 2.0 * d2.dxi + 2.0 * d3.dxi + d4.dxi);
                    if (((u - ch.domain_lo).minCoeff() < 0.0) ||
                        ((ch.domain_hi - u).minCoeff() < 0.0)) {
                        truncated = true;
                        break;
                    }
                    const Derivative dend = rhs(u, xi, x_ref, kappa_ref);
                    if (dend.collided) { truncated = true; break; }
                    x_ref = dend.du;
                    kappa_ref = dend.value;
                    curve_residual = std::max(curve_residual, std::abs(kappa_ref - kappa0));
                }
                if (truncated) ++rep.truncated_curves;
                if (curve_residual > residual) {
                    residual = curve_residual;
                    Witness wit;
                    wit.point = u0;
                    wit.normal = xi0;
                    wit.residual = curve_residual;
                    wit.detail = "cluster " + std::to_string(ci) +
                                 (truncated ? " (truncated curve)" : "");
                    rep.dupin.witness = std::move(wit);
                }
            }
        }
    }

    rep.dupin.evaluated = true;
    rep.dupin.tol = tol;
    rep.dupin.residual = residual;
    rep.dupin.verdict = verdict_from_residual(residual, tol);
    rep.dupin.reason = "max principal-value drift along curvature lines";
    if (rep.dupin.verdict == Verdict::pass) rep.dupin.witness.reset();
    return rep;
}

// ---- combined report ---------------------------------------------------

// Runs every classifier on one plan and merges the entries.  The nesting
// flag records whether the computed verdicts respect unipotent => CPC =>
// Dupin (an inconclusive verdict never contradicts).
inline ClassificationReport verify_all(const ImmersionChart& ch, const SamplePlan& plan,
                                       double tol = 0.0, double rk_step = 1e-3) {
    ClassificationReport rep = unipotent_check(ch, plan, tol);
    {
        ClassificationReport c = cpc_check(ch, plan, tol, rk_step);
        rep.cpc = c.cpc;
        rep.truncated_curves += c.truncated_curves;
    }
    {
        ClassificationReport d = dupin_check(ch, plan, tol, rk_step);
        rep.dupin = d.dupin;
        rep.truncated_curves += d.truncated_curves;
    }
    if (ch.codim() >= 2) rep.antipodal_residual = antipodal_symmetry_check(ch, plan);

    auto contradicts = [](const VerdictEntry& stronger, const VerdictEntry& weaker) {
        return stronger.evaluated && weaker.evaluated && stronger.verdict == Verdict::pass &&
               weaker.verdict == Verdict::fail;
    };
    rep.nesting_consistent =
        !contradicts(rep.unipotent, rep.cpc) && !contradicts(rep.cpc, rep.dupin) &&
        !contradicts(rep.unipotent, rep.dupin);
    return rep;
}

}  // namespace dupin
