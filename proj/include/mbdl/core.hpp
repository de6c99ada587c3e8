#ifndef MBDL_CORE_HPP
#define MBDL_CORE_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbdl {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using cplx = std::complex<double>;
using MatrixXc = Matrix<cplx>;

/// Spin configuration over an ordered site list; bit k set means spin up at the k-th site.
using Config = std::uint64_t;

// Error hierarchy. Each kind maps to one failure class named in the module contracts.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class ParameterError : public Error { using Error::Error; };
class SizeError : public Error { using Error::Error; };
class ConstructionError : public Error { using Error::Error; };
class ContractError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class FitError : public Error { using Error::Error; };

class ConditioningError : public NumericError {
public:
    ConditioningError(const std::string& what, double measure)
        : NumericError(what), measure_(measure) {}
    /// Offending gap to the spectrum or estimated condition number.
    double measure() const { return measure_; }

private:
    double measure_;
};

class SingularityError : public NumericError {
public:
    SingularityError(const std::string& what, std::vector<int> dependent_rows)
        : NumericError(what), rows_(std::move(dependent_rows)) {}
    const std::vector<int>& dependent_rows() const { return rows_; }

private:
    std::vector<int> rows_;
};

inline int popcount(Config c) { return __builtin_popcountll(c); }
inline int hamming(Config a, Config b) { return popcount(a ^ b); }
inline bool bit(Config c, int k) { return (c >> k) & 1u; }

/// Binomial coefficient, zero outside 0 <= k <= n.
std::uint64_t binom(long n, long k);

// ---------------------------------------------------------------------------
// Random numbers
//
// Every realisation r of an ensemble draws from its own engine, seeded with
// child_seed(base_seed, r). The seed mixer is SplitMix64; the engine is
// MT19937-64; normals come from the Box-Muller transform on 53-bit uniforms.
// All three are fixed here so ensembles are bit-reproducible and can be
// evaluated in any order.
// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t child_seed(std::uint64_t base_seed, std::uint64_t index);

class GaussianSource {
public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on (0, 1].
    double uniform();
    /// Standard normal.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Neumaier compensated accumulator.
class CompensatedSum {
public:
    void add(double x);
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Sample mean and standard error of the mean (sample std / sqrt(n)).
struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};
MeanStderr mean_stderr(const std::vector<double>& samples);

/// Runs task(i) for i in [0, count) on up to `jobs` threads. Tasks must write
/// only to their own slot; callers aggregate afterwards in index order.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

/// Largest singular value.
template <typename Derived>
double norm2(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0.0;
    using S = typename Derived::Scalar;
    Matrix<S> gram = m.rows() < m.cols() ? Matrix<S>(m * m.adjoint()) : Matrix<S>(m.adjoint() * m);
    Eigen::SelfAdjointEigenSolver<Matrix<S>> es(gram, Eigen::EigenvaluesOnly);
    double top = es.eigenvalues().maxCoeff();
    return top > 0.0 ? std::sqrt(top) : 0.0;
}

const char* version_string();

}  // namespace mbdl

#endif  // MBDL_CORE_HPP
