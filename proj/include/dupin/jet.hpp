#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

// Forward-mode automatic differentiation scalars.
//
// Jet1 carries a value and a gradient, Jet2 additionally a dense Hessian.
// Chart bodies are written generically over the scalar type, so the same
// source expression yields values, Jacobians and second derivatives without
// any finite differencing.  All rules below are the usual calculus identities;
// the Hessian of a product picks up the symmetric outer-product cross term.

namespace dupin {

struct Jet1 {
    double v = 0.0;
    Eigen::VectorXd g;

    Jet1() = default;
    Jet1(double value, Eigen::VectorXd grad) : v(value), g(std::move(grad)) {}
};

struct Jet2 {
    double v = 0.0;
    Eigen::VectorXd g;
    Eigen::MatrixXd h;

    Jet2() = default;
    Jet2(double value, Eigen::VectorXd grad, Eigen::MatrixXd hess)
        : v(value), g(std::move(grad)), h(std::move(hess)) {}
};

// ---- seeds ------------------------------------------------------------

inline std::vector<Jet1> seed_jet1(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    std::vector<Jet1> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        g(i) = 1.0;
        out.emplace_back(u(i), std::move(g));
    }
    return out;
}

inline std::vector<Jet2> seed_jet2(const Eigen::VectorXd& u) {
    const int n = static_cast<int>(u.size());
    std::vector<Jet2> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        g(i) = 1.0;
        out.emplace_back(u(i), std::move(g), Eigen::MatrixXd::Zero(n, n));
    }
    return out;
}

// value() and const_like() let generic code treat double and jets uniformly.
inline double value(double x) { return x; }
inline double value(const Jet1& x) { return x.v; }
inline double value(const Jet2& x) { return x.v; }

inline double const_like(const double&, double c) { return c; }
inline Jet1 const_like(const Jet1& model, double c) {
    return {c, Eigen::VectorXd::Zero(model.g.size())};
}
inline Jet2 const_like(const Jet2& model, double c) {
    const auto n = model.g.size();
    return {c, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
}

// ---- Jet1 arithmetic --------------------------------------------------

inline Jet1 operator+(const Jet1& a, const Jet1& b) { return {a.v + b.v, a.g + b.g}; }
inline Jet1 operator-(const Jet1& a, const Jet1& b) { return {a.v - b.v, a.g - b.g}; }
inline Jet1 operator-(const Jet1& a) { return {-a.v, -a.g}; }
inline Jet1 operator*(const Jet1& a, const Jet1& b) {
    return {a.v * b.v, a.g * b.v + b.g * a.v};
}

inline Jet1 operator+(const Jet1& a, double c) { return {a.v + c, a.g}; }
inline Jet1 operator+(double c, const Jet1& a) { return {a.v + c, a.g}; }
inline Jet1 operator-(const Jet1& a, double c) { return {a.v - c, a.g}; }
inline Jet1 operator-(double c, const Jet1& a) { return {c - a.v, -a.g}; }
inline Jet1 operator*(const Jet1& a, double c) { return {a.v * c, a.g * c}; }
inline Jet1 operator*(double c, const Jet1& a) { return {a.v * c, a.g * c}; }

// chain(x, f, f') applies a smooth unary function given its derivatives at x.v.
inline Jet1 chain(const Jet1& x, double f, double fp) { return {f, fp * x.g}; }

inline Jet1 operator/(const Jet1& a, const Jet1& b) {
    const double inv = 1.0 / b.v;
    return a * chain(b, inv, -inv * inv);
}
inline Jet1 operator/(const Jet1& a, double c) { return a * (1.0 / c); }
inline Jet1 operator/(double c, const Jet1& b) {
    const double inv = 1.0 / b.v;
    return chain(b, c * inv, -c * inv * inv);
}

inline Jet1 sqrt(const Jet1& x) {
    const double s = std::sqrt(x.v);
    return chain(x, s, 0.5 / s);
}
inline Jet1 sin(const Jet1& x) { return chain(x, std::sin(x.v), std::cos(x.v)); }
inline Jet1 cos(const Jet1& x) { return chain(x, std::cos(x.v), -std::sin(x.v)); }
inline Jet1 exp(const Jet1& x) {
    const double e = std::exp(x.v);
    return chain(x, e, e);
}

// ---- Jet2 arithmetic --------------------------------------------------

inline Jet2 operator+(const Jet2& a, const Jet2& b) { return {a.v + b.v, a.g + b.g, a.h + b.h}; }
inline Jet2 operator-(const Jet2& a, const Jet2& b) { return {a.v - b.v, a.g - b.g, a.h - b.h}; }
inline Jet2 operator-(const Jet2& a) { return {-a.v, -a.g, -a.h}; }
inline Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v,
            a.g * b.v + b.g * a.v,
            a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose()};
}

inline Jet2 operator+(const Jet2& a, double c) { return {a.v + c, a.g, a.h}; }
inline Jet2 operator+(double c, const Jet2& a) { return {a.v + c, a.g, a.h}; }
inline Jet2 operator-(const Jet2& a, double c) { return {a.v - c, a.g, a.h}; }
inline Jet2 operator-(double c, const Jet2& a) { return {c - a.v, -a.g, -a.h}; }
inline Jet2 operator*(const Jet2& a, double c) { return {a.v * c, a.g * c, a.h * c}; }
inline Jet2 operator*(double c, const Jet2& a) { return {a.v * c, a.g * c, a.h * c}; }

inline Jet2 chain(const Jet2& x, double f, double fp, double fpp) {
    return {f, fp * x.g, fp * x.h + fpp * (x.g * x.g.transpose())};
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) {
    const double inv = 1.0 / b.v;
    return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}
inline Jet2 operator/(const Jet2& a, double c) { return a * (1.0 / c); }
inline Jet2 operator/(double c, const Jet2& b) {
    const double inv = 1.0 / b.v;
    return chain(b, c * inv, -c * inv * inv, 2.0 * c * inv * inv * inv);
}

inline Jet2 sqrt(const Jet2& x) {
    const double s = std::sqrt(x.v);
    return chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}
inline Jet2 sin(const Jet2& x) {
    const double s = std::sin(x.v), c = std::cos(x.v);
    return chain(x, s, c, -s);
}
inline Jet2 cos(const Jet2& x) {
    const double s = std::sin(x.v), c = std::cos(x.v);
    return chain(x, c, -s, -c);
}
inline Jet2 exp(const Jet2& x) {
    const double e = std::exp(x.v);
    return chain(x, e, e, e);
}

// ---- analytic functions of a squared argument -------------------------
//
// cos_sqrt(q) = cos(sqrt(q)) and sinc_sqrt(q) = sin(sqrt(q))/sqrt(q) are
// smooth functions of q = |s|^2 even through q = 0, which keeps exponential
// maps differentiable at the zero section.  Series are used below the
// switch point; the closed forms and the series agree to ~1e-16 there.

namespace detail {

inline void cos_sqrt_derivs(double q, double& f, double& fp, double& fpp) {
    if (q < 1e-6) {
        // cos sqrt(q) = 1 - q/2 + q^2/24 - q^3/720 + ...
        f = 1.0 - q / 2.0 + q * q / 24.0 - q * q * q / 720.0;
        fp = -0.5 + q / 12.0 - q * q / 240.0;
        fpp = 1.0 / 12.0 - q / 120.0;
        return;
    }
    const double r = std::sqrt(q);
    const double s = std::sin(r), c = std::cos(r);
    f = c;
    fp = -0.5 * s / r;
    // d/dq [-sin(r)/(2r)] with dr/dq = 1/(2r)
    fpp = (s / r - c) / (4.0 * q);
}

inline void sinc_sqrt_derivs(double q, double& f, double& fp, double& fpp) {
    if (q < 1e-6) {
        // sin sqrt(q)/sqrt(q) = 1 - q/6 + q^2/120 - q^3/5040 + ...
        f = 1.0 - q / 6.0 + q * q / 120.0 - q * q * q / 5040.0;
        fp = -1.0 / 6.0 + q / 60.0 - q * q / 1680.0;
        fpp = 1.0 / 60.0 - q / 840.0;
        return;
    }
    const double r = std::sqrt(q);
    const double s = std::sin(r), c = std::cos(r);
    f = s / r;
    fp = (c - s / r) / (2.0 * q);
    fpp = (3.0 * s / r - 3.0 * c - s * r) / (4.0 * q * q);
}

}  // namespace detail

namespace detail {

inline void cosh_sqrt_derivs(double q, double& f, double& fp, double& fpp) {
    if (q < 1e-6) {
        f = 1.0 + q / 2.0 + q * q / 24.0 + q * q * q / 720.0;
        fp = 0.5 + q / 12.0 + q * q / 240.0;
        fpp = 1.0 / 12.0 + q / 120.0;
        return;
    }
    const double r = std::sqrt(q);
    const double s = std::sinh(r), c = std::cosh(r);
    f = c;
    fp = 0.5 * s / r;
    fpp = (c - s / r) / (4.0 * q);
}

inline void sinhc_sqrt_derivs(double q, double& f, double& fp, double& fpp) {
    if (q < 1e-6) {
        f = 1.0 + q / 6.0 + q * q / 120.0 + q * q * q / 5040.0;
        fp = 1.0 / 6.0 + q / 60.0 + q * q / 1680.0;
        fpp = 1.0 / 60.0 + q / 840.0;
        return;
    }
    const double r = std::sqrt(q);
    const double s = std::sinh(r), c = std::cosh(r);
    f = s / r;
    fp = (c - s / r) / (2.0 * q);
    fpp = (3.0 * s / r - 3.0 * c + s * r) / (4.0 * q * q);
}

}  // namespace detail

inline double cos_sqrt(double q) {
    double f, fp, fpp;
    detail::cos_sqrt_derivs(q, f, fp, fpp);
    return f;
}
inline Jet1 cos_sqrt(const Jet1& x) {
    double f, fp, fpp;
    detail::cos_sqrt_derivs(x.v, f, fp, fpp);
    return chain(x, f, fp);
}
inline Jet2 cos_sqrt(const Jet2& x) {
    double f, fp, fpp;
    detail::cos_sqrt_derivs(x.v, f, fp, fpp);
    return chain(x, f, fp, fpp);
}

inline double sinc_sqrt(double q) {
    double f, fp, fpp;
    detail::sinc_sqrt_derivs(q, f, fp, fpp);
    return f;
}
inline Jet1 sinc_sqrt(const Jet1& x) {
    double f, fp, fpp;
    detail::sinc_sqrt_derivs(x.v, f, fp, fpp);
    return chain(x, f, fp);
}
inline Jet2 sinc_sqrt(const Jet2& x) {
    double f, fp, fpp;
    detail::sinc_sqrt_derivs(x.v, f, fp, fpp);
    return chain(x, f, fp, fpp);
}

inline double cosh_sqrt(double q) {
    double f, fp, fpp;
    detail::cosh_sqrt_derivs(q, f, fp, fpp);
    return f;
}
inline Jet1 cosh_sqrt(const Jet1& x) {
    double f, fp, fpp;
    detail::cosh_sqrt_derivs(x.v, f, fp, fpp);
    return chain(x, f, fp);
}
inline Jet2 cosh_sqrt(const Jet2& x) {
    double f, fp, fpp;
    detail::cosh_sqrt_derivs(x.v, f, fp, fpp);
    return chain(x, f, fp, fpp);
}

inline double sinhc_sqrt(double q) {
    double f, fp, fpp;
    detail::sinhc_sqrt_derivs(q, f, fp, fpp);
    return f;
}
inline Jet1 sinhc_sqrt(const Jet1& x) {
    double f, fp, fpp;
    detail::sinhc_sqrt_derivs(x.v, f, fp, fpp);
    return chain(x, f, fp);
}
inline Jet2 sinhc_sqrt(const Jet2& x) {
    double f, fp, fpp;
    detail::sinhc_sqrt_derivs(x.v, f, fp, fpp);
    return chain(x, f, fp, fpp);
}

}  // namespace dupin
