#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dupin/errors.hpp"
#include "dupin/jet.hpp"

// Parametrized immersions into space forms and their curvature data.
//
// A chart maps an open box in R^n into the coordinate space of the target:
//   c > 0 : the sphere of radius 1/sqrt(c) in R^{m+1} (Euclidean ambient)
//   c = 0 : R^m itself
//   c < 0 : the hyperboloid <x,x> = 1/c, x_0 > 0, in Lorentz R^{m+1}
// First and second derivatives come from an analytic jet oracle when the
// chart has one (charts built from generic bodies always do) and otherwise
// from central finite differences at documented step sizes.

namespace dupin {

struct ChartJet {
    Eigen::VectorXd value;                 // ambient coordinates
    Eigen::MatrixXd jacobian;              // coords x n
    std::vector<Eigen::MatrixXd> hessian;  // per coordinate, n x n symmetric
};

struct ImmersionChart {
    std::string name;
    int intrinsic_dim = 0;   // n
    int ambient_coords = 0;  // number of coordinates of the embedding space
    double curvature = 0.0;  // c of the target space form
    Eigen::VectorXd domain_lo, domain_hi;
    double fd_step = 1e-5;
    // Divided differences at fd_step are second order; with richardson set
    // the h and h/2 stencils are combined to fourth order.  Only the
    // finite-difference fallback looks at this flag.
    bool richardson = false;

    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eval;
    // Optional analytic oracles; jet1 is the cheap value+Jacobian path.
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)> jet1;
    std::function<ChartJet(const Eigen::VectorXd&)> jet2;

    // Dimension m of the space form the image lies in.
    int ambient_dim() const { return curvature != 0.0 ? ambient_coords - 1 : ambient_coords; }
    int codim() const { return ambient_dim() - intrinsic_dim; }
    bool has_analytic_jet() const { return static_cast<bool>(jet2); }
    double default_cluster_tol() const { return has_analytic_jet() ? 1e-6 : 1e-4; }

    // Diagonal of the ambient metric G (Lorentzian first axis iff c < 0).
    Eigen::VectorXd ambient_weights() const {
        Eigen::VectorXd w = Eigen::VectorXd::Ones(ambient_coords);
        if (curvature < 0.0) w(0) = -1.0;
        return w;
    }

    Eigen::VectorXd domain_center() const { return 0.5 * (domain_lo + domain_hi); }

    ImmersionChart without_jets() const {
        ImmersionChart c = *this;
        c.jet1 = nullptr;
        c.jet2 = nullptr;
        return c;
    }
};

// ---- generic chart bodies ---------------------------------------------

// Builds a chart from one templated body evaluated over double, Jet1 and
// Jet2 scalars, so eval and both jet oracles share a single source of truth.
template <class F>
ImmersionChart chart_from_body(std::string name, int n, int ambient_coords, double c,
                               Eigen::VectorXd lo, Eigen::VectorXd hi, F body) {
    ImmersionChart ch;
    ch.name = std::move(name);
    ch.intrinsic_dim = n;
    ch.ambient_coords = ambient_coords;
    ch.curvature = c;
    ch.domain_lo = std::move(lo);
    ch.domain_hi = std::move(hi);

    ch.eval = [body](const Eigen::VectorXd& u) {
        std::vector<double> in(u.data(), u.data() + u.size());
        const std::vector<double> out = body(in);
        return Eigen::Map<const Eigen::VectorXd>(out.data(), out.size()).eval();
    };
    ch.jet1 = [body](const Eigen::VectorXd& u, Eigen::VectorXd& val, Eigen::MatrixXd& jac) {
        const std::vector<Jet1> out = body(seed_jet1(u));
        const int m = static_cast<int>(out.size());
        val.resize(m);
        jac.resize(m, u.size());
        for (int k = 0; k < m; ++k) {
            val(k) = out[k].v;
            jac.row(k) = out[k].g.transpose();
        }
    };
    ch.jet2 = [body](const Eigen::VectorXd& u) {
        const std::vector<Jet2> out = body(seed_jet2(u));
        const int m = static_cast<int>(out.size());
        ChartJet jet;
        jet.value.resize(m);
        jet.jacobian.resize(m, u.size());
        jet.hessian.resize(m);
        for (int k = 0; k < m; ++k) {
            jet.value(k) = out[k].v;
            jet.jacobian.row(k) = out[k].g.transpose();
            jet.hessian[k] = 0.5 * (out[k].h + out[k].h.transpose());
        }
        return jet;
    };
    return ch;
}

// ---- jet evaluation with finite-difference fallback -------------------

namespace detail {

inline Eigen::MatrixXd fd_jacobian_step(const ImmersionChart& ch, const Eigen::VectorXd& u,
                                        double h) {
    const int n = static_cast<int>(u.size());
    Eigen::MatrixXd jac(ch.ambient_coords, n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd up = u, um = u;
        up(i) += h;
        um(i) -= h;
        jac.col(i) = (ch.eval(up) - ch.eval(um)) / (2.0 * h);
    }
    return jac;
}

inline Eigen::MatrixXd fd_jacobian(const ImmersionChart& ch, const Eigen::VectorXd& u,
                                   double h) {
    if (!ch.richardson) return fd_jacobian_step(ch, u, h);
    // Central differences err in h^2, so (4 D(h/2) - D(h)) / 3 cancels the
    // leading term.
    return (4.0 * fd_jacobian_step(ch, u, 0.5 * h) - fd_jacobian_step(ch, u, h)) / 3.0;
}

}  // namespace detail

inline void chart_jet1(const ImmersionChart& ch, const Eigen::VectorXd& u, Eigen::VectorXd& val,
                       Eigen::MatrixXd& jac) {
    if (ch.jet1) {
        ch.jet1(u, val, jac);
        return;
    }
    if (ch.jet2) {
        ChartJet j = ch.jet2(u);
        val = std::move(j.value);
        jac = std::move(j.jacobian);
        return;
    }
    val = ch.eval(u);
    jac = detail::fd_jacobian(ch, u, ch.fd_step);
}

// Second derivatives by nested central differences use a coarser step than
// the Jacobian: the double difference divides by h^2, so h = 1e-4 balances
// truncation against rounding for unit-scale charts.
inline ChartJet chart_jet(const ImmersionChart& ch, const Eigen::VectorXd& u) {
    if (ch.jet2) return ch.jet2(u);
    const int n = static_cast<int>(u.size());
    ChartJet jet;
    jet.value = ch.eval(u);
    jet.jacobian = detail::fd_jacobian(ch, u, ch.fd_step);
    jet.hessian.assign(ch.ambient_coords, Eigen::MatrixXd::Zero(n, n));
    const double h = 1e-4;
    auto cross = [&ch, &u](int i, int j, double s) {
        Eigen::VectorXd upp = u, upm = u, ump = u, umm = u;
        upp(i) += s; upp(j) += s;
        upm(i) += s; upm(j) -= s;
        ump(i) -= s; ump(j) += s;
        umm(i) -= s; umm(j) -= s;
        return Eigen::VectorXd((ch.eval(upp) - ch.eval(upm) - ch.eval(ump) + ch.eval(umm)) /
                               (4.0 * s * s));
    };
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const Eigen::VectorXd d = ch.richardson
                                          ? Eigen::VectorXd((4.0 * cross(i, j, 0.5 * h) -
                                                             cross(i, j, h)) / 3.0)
                                          : cross(i, j, h);
            for (int k = 0; k < ch.ambient_coords; ++k) {
                jet.hessian[k](i, j) = d(k);
                jet.hessian[k](j, i) = d(k);
            }
        }
    }
    return jet;
}

// ---- frames without second derivatives --------------------------------

// First-order data: position, Jacobian, metric and the deterministic
// G-orthonormal normal frame.  This is the cheap path for transport code and
// frame-dependent chart constructions that never touch second derivatives.
struct FrameData {
    Eigen::VectorXd position;
    Eigen::MatrixXd jacobian;
    Eigen::MatrixXd metric;
    Eigen::MatrixXd normal_frame;  // coords x p
};

inline FrameData frame_data(const ImmersionChart& ch, const Eigen::VectorXd& u) {
    if (u.size() != ch.intrinsic_dim)
        throw contract_violation("frame_data: point dimension mismatch");
    FrameData fd;
    chart_jet1(ch, u, fd.position, fd.jacobian);
    const Eigen::VectorXd w = ch.ambient_weights();
    const int coords = ch.ambient_coords;
    fd.metric = fd.jacobian.transpose() * w.asDiagonal() * fd.jacobian;
    fd.metric = 0.5 * (fd.metric + fd.metric.transpose()).eval();

    auto gdot = [&w](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (w.array() * a.array() * b.array()).sum();
    };
    std::vector<Eigen::VectorXd> accepted;
    std::vector<double> accepted_sign;
    auto admit = [&](Eigen::VectorXd v) -> bool {
        for (std::size_t j = 0; j < accepted.size(); ++j)
            v -= accepted_sign[j] * gdot(v, accepted[j]) * accepted[j];
        const double q = gdot(v, v);
        if (std::abs(q) < 1e-10) return false;
        accepted.push_back(v / std::sqrt(std::abs(q)));
        accepted_sign.push_back(q > 0 ? 1.0 : -1.0);
        return true;
    };
    if (ch.curvature != 0.0) admit(fd.position);
    for (int i = 0; i < ch.intrinsic_dim; ++i)
        if (!admit(fd.jacobian.col(i)))
            throw degenerate_chart("frame_data: tangent column degenerate");
    const std::size_t spanned = accepted.size();
    for (int i = 0; i < coords && accepted.size() < static_cast<std::size_t>(coords); ++i)
        admit(Eigen::VectorXd::Unit(coords, i));
    if (accepted.size() != static_cast<std::size_t>(coords))
        throw degenerate_chart("frame_data: could not complete the ambient frame");
    const int p = coords - static_cast<int>(spanned);
    fd.normal_frame.resize(coords, p);
    for (int a = 0; a < p; ++a) fd.normal_frame.col(a) = accepted[spanned + a];
    return fd;
}

// ---- fundamental forms ------------------------------------------------

struct FundamentalForms {
    Eigen::VectorXd u;
    Eigen::VectorXd position;
    Eigen::MatrixXd jacobian;                  // coords x n
    Eigen::MatrixXd metric;                    // n x n, positive definite
    Eigen::MatrixXd normal_frame;              // coords x p, G-orthonormal columns
    std::vector<Eigen::MatrixXd> second_form;  // p matrices, n x n symmetric
    Eigen::VectorXd mean_curvature;            // frame coordinates of the mean curvature vector

    int n() const { return static_cast<int>(metric.rows()); }
    int p() const { return static_cast<int>(normal_frame.cols()); }
};

// Deterministic G-orthonormal completion: the accepted span starts from the
// prescribed vectors (position, then tangent columns), then coordinate axes
// are admitted in index order when their projected residual is solid.  The
// vectors accepted from the axis phase form the normal frame; the pivot set
// is locally constant in u, so frames vary smoothly over a sweep.
inline FundamentalForms fundamental_forms(const ImmersionChart& ch, const Eigen::VectorXd& u) {
    if (u.size() != ch.intrinsic_dim)
        throw contract_violation("fundamental_forms: point dimension mismatch");
    const ChartJet jet = chart_jet(ch, u);
    const Eigen::VectorXd w = ch.ambient_weights();
    const int n = ch.intrinsic_dim;
    const int coords = ch.ambient_coords;

    if (ch.curvature != 0.0) {
        const double q = (w.array() * jet.value.array() * jet.value.array()).sum();
        if (std::abs(q - 1.0 / ch.curvature) > 1e-8 * std::max(1.0, std::abs(1.0 / ch.curvature)))
            throw invalid_input("fundamental_forms: chart point off the space form, |x|^2 = " +
                                std::to_string(q));
    }

    FundamentalForms ff;
    ff.u = u;
    ff.position = jet.value;
    ff.jacobian = jet.jacobian;
    ff.metric = jet.jacobian.transpose() * w.asDiagonal() * jet.jacobian;
    ff.metric = 0.5 * (ff.metric + ff.metric.transpose()).eval();

    {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(jet.jacobian);
        if (svd.singularValues()(n - 1) <= 1e-8)
            throw degenerate_chart("fundamental_forms: differential rank-deficient at sample, "
                                   "smallest singular value " +
                                   std::to_string(svd.singularValues()(n - 1)));
    }

    auto gdot = [&w](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return (w.array() * a.array() * b.array()).sum();
    };

    std::vector<Eigen::VectorXd> accepted;
    std::vector<double> accepted_sign;
    auto admit = [&](Eigen::VectorXd v, double pivot_tol) -> bool {
        for (std::size_t j = 0; j < accepted.size(); ++j)
            v -= accepted_sign[j] * gdot(v, accepted[j]) * accepted[j];
        const double q = gdot(v, v);
        if (std::abs(q) < pivot_tol) return false;
        accepted.push_back(v / std::sqrt(std::abs(q)));
        accepted_sign.push_back(q > 0 ? 1.0 : -1.0);
        return true;
    };

    if (ch.curvature != 0.0) admit(jet.value, 1e-10);
    for (int i = 0; i < n; ++i)
        if (!admit(jet.jacobian.col(i), 1e-10))
            throw degenerate_chart("fundamental_forms: tangent column degenerate");
    const std::size_t spanned = accepted.size();
    for (int i = 0; i < coords && accepted.size() < static_cast<std::size_t>(coords); ++i)
        admit(Eigen::VectorXd::Unit(coords, i), 1e-10);
    if (accepted.size() != static_cast<std::size_t>(coords))
        throw degenerate_chart("fundamental_forms: could not complete the ambient frame");

    const int p = coords - static_cast<int>(spanned);
    ff.normal_frame.resize(coords, p);
    for (int a = 0; a < p; ++a) ff.normal_frame.col(a) = accepted[spanned + a];

    // Second fundamental form in the frame.  The sign makes the round sphere
    // with outward normal have second_form = metric (A = +I).
    ff.second_form.assign(p, Eigen::MatrixXd::Zero(n, n));
    for (int a = 0; a < p; ++a) {
        const Eigen::VectorXd nu = ff.normal_frame.col(a);
        for (int k = 0; k < coords; ++k) {
            const double coef = -w(k) * nu(k);
            if (coef != 0.0) ff.second_form[a] += coef * jet.hessian[k];
        }
        ff.second_form[a] = 0.5 * (ff.second_form[a] + ff.second_form[a].transpose()).eval();
    }

    ff.mean_curvature.resize(p);
    const Eigen::LLT<Eigen::MatrixXd> llt(ff.metric);
    for (int a = 0; a < p; ++a)
        ff.mean_curvature(a) = llt.solve(ff.second_form[a]).trace() / static_cast<double>(n);
    return ff;
}

// ---- shape operators and spectra --------------------------------------

inline Eigen::MatrixXd shape_operator(const FundamentalForms& ff, const Eigen::VectorXd& xi) {
    if (xi.size() != ff.p()) throw contract_violation("shape_operator: normal coordinate count");
    if (std::abs(xi.norm() - 1.0) > 1e-8)
        throw invalid_input("shape_operator: normal coordinates not unit, |xi| = " +
                            std::to_string(xi.norm()));
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(ff.n(), ff.n());
    for (int a = 0; a < ff.p(); ++a) s += xi(a) * ff.second_form[a];
    return ff.metric.llt().solve(s);
}

inline Eigen::MatrixXd shape_operator(const ImmersionChart& ch, const Eigen::VectorXd& u,
                                      const Eigen::VectorXd& xi) {
    return shape_operator(fundamental_forms(ch, u), xi);
}

struct SpectrumCluster {
    double value = 0.0;
    int multiplicity = 0;
    int first = 0;  // index of the first member in the sorted eigenvalue list
};

struct ShapeSpectrum {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenbasis;   // columns metric-orthonormal, matching eigenvalue order
    std::vector<SpectrumCluster> clusters;
    double cluster_tol = 0.0;

    std::vector<double> cluster_values() const {
        std::vector<double> v;
        v.reserve(clusters.size());
        for (const auto& c : clusters) v.push_back(c.value);
        return v;
    }
    std::vector<int> multiplicities() const {
        std::vector<int> m;
        m.reserve(clusters.size());
        for (const auto& c : clusters) m.push_back(c.multiplicity);
        return m;
    }
    // Smallest gap between consecutive clusters (inf for a single cluster).
    double min_gap() const {
        double g = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < clusters.size(); ++i)
            g = std::min(g, clusters[i].value - clusters[i - 1].value);
        return g;
    }
};

inline ShapeSpectrum principal_spectrum(const FundamentalForms& ff, const Eigen::VectorXd& xi,
                                        double cluster_tol) {
    if (!(cluster_tol > 0.0)) throw contract_violation("principal_spectrum: cluster_tol <= 0");
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(ff.n(), ff.n());
    if (std::abs(xi.norm() - 1.0) > 1e-8)
        throw invalid_input("principal_spectrum: normal coordinates not unit");
    for (int a = 0; a < ff.p(); ++a) s += xi(a) * ff.second_form[a];

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(s, ff.metric);
    if (es.info() != Eigen::Success)
        throw error("principal_spectrum: generalized eigensolver failed");

    ShapeSpectrum sp;
    sp.eigenvalues = es.eigenvalues();
    sp.eigenbasis = es.eigenvectors();  // columns satisfy V^T metric V = I
    sp.cluster_tol = cluster_tol;
    const int n = ff.n();
    int start = 0;
    for (int i = 1; i <= n; ++i) {
        if (i == n || sp.eigenvalues(i) - sp.eigenvalues(i - 1) > cluster_tol) {
            SpectrumCluster c;
            c.first = start;
            c.multiplicity = i - start;
            c.value = sp.eigenvalues.segment(start, i - start).mean();
            sp.clusters.push_back(c);
            start = i;
        }
    }
    return sp;
}

inline ShapeSpectrum principal_spectrum(const ImmersionChart& ch, const Eigen::VectorXd& u,
                                        const Eigen::VectorXd& xi, double cluster_tol) {
    return principal_spectrum(fundamental_forms(ch, u), xi, cluster_tol);
}

// Frobenius norm of the normal curvature tensor via the Ricci equation:
// components <[A_a, A_b]X, Y> over metric-orthonormal tangent and normal
// frames.  Conjugating by the metric Cholesky factor turns each shape
// operator into a plain symmetric matrix with the same commutators.
inline double normal_curvature_norm(const FundamentalForms& ff) {
    const int p = ff.p();
    const Eigen::MatrixXd l = Eigen::MatrixXd(ff.metric.llt().matrixL());
    const Eigen::MatrixXd linv = l.inverse();
    std::vector<Eigen::MatrixXd> sym(p);
    for (int a = 0; a < p; ++a) sym[a] = linv * ff.second_form[a] * linv.transpose();
    double total = 0.0;
    for (int a = 0; a < p; ++a)
        for (int b = a + 1; b < p; ++b)
            total += (sym[a] * sym[b] - sym[b] * sym[a]).squaredNorm();
    return std::sqrt(total);
}

inline double normal_curvature_norm(const ImmersionChart& ch, const Eigen::VectorXd& u) {
    return normal_curvature_norm(fundamental_forms(ch, u));
}

}  // namespace dupin
