#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "dupin/errors.hpp"

// Deterministic sampling.
//
// All randomness in the library flows from a single 64-bit seed through the
// helpers here.  Low-discrepancy point sets use an additive Weyl lattice
// (fractional parts of k * sqrt(prime)); Gaussians are produced by an
// explicit Box-Muller transform rather than std::normal_distribution, whose
// output is implementation-defined.  Reruns with the same seed are therefore
// byte-identical on a given platform.

namespace dupin {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in [0,1) from one splitmix output (53 mantissa bits).
inline double u01(std::uint64_t& state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    double uniform() { return u01(state_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; the spare cosine partner is cached for the next call.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double a = uniform();
        if (a < 1e-300) a = 1e-300;
        const double b = uniform();
        const double r = std::sqrt(-2.0 * std::log(a));
        const double t = 2.0 * M_PI * b;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    Eigen::VectorXd gaussian_vector(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v(i) = gaussian();
        return v;
    }

    Eigen::VectorXd unit_vector(int n) {
        for (int tries = 0; tries < 64; ++tries) {
            Eigen::VectorXd v = gaussian_vector(n);
            const double norm = v.norm();
            if (norm > 1e-6) return v / norm;
        }
        throw error("unit_vector: degenerate draws");
    }

    std::uint64_t fork() { return splitmix64(state_); }

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Additive lattice in [0,1)^dim: point k is frac(offset + k * alpha) with
// alpha_j = frac(sqrt(p_j)) over distinct primes.  Equidistributed and cheap.
class WeylSequence {
  public:
    WeylSequence(int dim, std::uint64_t seed) : alpha_(dim), current_(dim) {
        static const int primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                     41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};
        if (dim > static_cast<int>(sizeof(primes) / sizeof(primes[0])))
            throw invalid_input("WeylSequence: dimension too large");
        std::uint64_t st = seed;
        for (int j = 0; j < dim; ++j) {
            const double s = std::sqrt(static_cast<double>(primes[j]));
            alpha_(j) = s - std::floor(s);
            current_(j) = u01(st);
        }
    }

    Eigen::VectorXd next() {
        for (int j = 0; j < current_.size(); ++j) {
            current_(j) += alpha_(j);
            current_(j) -= std::floor(current_(j));
        }
        return current_;
    }

  private:
    Eigen::VectorXd alpha_;
    Eigen::VectorXd current_;
};

// count points equidistributed over the box [lo, hi] (componentwise).
inline std::vector<Eigen::VectorXd> box_covering(const Eigen::VectorXd& lo,
                                                 const Eigen::VectorXd& hi, int count,
                                                 std::uint64_t seed) {
    if (lo.size() != hi.size()) throw contract_violation("box_covering: bound size mismatch");
    WeylSequence seq(static_cast<int>(lo.size()), seed);
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
        Eigen::VectorXd t = seq.next();
        pts.push_back(lo.array() + (hi - lo).array() * t.array());
    }
    return pts;
}

// Antipodally closed covering of the unit sphere S^{dim-1}.  The first half
// comes from Weyl points pushed through Box-Muller and normalized; the second
// half is the exact negation of the first, so xi and -xi always pair up at
// indices i and i + count/2.
inline std::vector<Eigen::VectorXd> sphere_covering(int dim, int count, std::uint64_t seed) {
    if (dim < 1) throw invalid_input("sphere_covering: dim must be positive");
    if (count % 2 != 0) ++count;
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(count);
    const int half = count / 2;
    if (dim == 1) {
        for (int k = 0; k < half; ++k) pts.push_back(Eigen::VectorXd::Constant(1, 1.0));
        for (int k = 0; k < half; ++k) pts.push_back(Eigen::VectorXd::Constant(1, -1.0));
        return pts;
    }
    const int pairs = (dim + 1) / 2;
    WeylSequence seq(2 * pairs, seed);
    for (int k = 0; k < half; ++k) {
        Eigen::VectorXd t = seq.next();
        Eigen::VectorXd v(dim);
        for (int j = 0; j < dim; ++j) {
            const int p = j / 2;
            double a = t(2 * p), b = t(2 * p + 1);
            if (a < 1e-12) a = 1e-12;
            const double r = std::sqrt(-2.0 * std::log(a));
            v(j) = (j % 2 == 0) ? r * std::cos(2.0 * M_PI * b) : r * std::sin(2.0 * M_PI * b);
        }
        const double norm = v.norm();
        v = (norm > 1e-9) ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Unit(dim, 0);
        pts.push_back(v);
    }
    for (int k = 0; k < half; ++k) pts.push_back(-pts[k]);
    return pts;
}

}  // namespace dupin
