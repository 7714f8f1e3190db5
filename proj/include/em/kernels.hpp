#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <em/types.hpp>

namespace em {

enum class KernelFamily { cauchy, power, fourier, laplace, lorentzian };

const char*  to_string(KernelFamily f);
KernelFamily kernel_family_from_string(std::string_view name);

/// An analytic kernel G(s, x). Closed set of families; lorentzian carries a
/// width parameter gamma > 0, the others are parameter-free.
struct Kernel {
    KernelFamily family = KernelFamily::cauchy;
    Real         gamma  = 0.0;

    static Kernel cauchy()  { return {KernelFamily::cauchy, 0.0}; }
    static Kernel power()   { return {KernelFamily::power, 0.0}; }
    static Kernel fourier() { return {KernelFamily::fourier, 0.0}; }
    static Kernel laplace() { return {KernelFamily::laplace, 0.0}; }
    static Kernel lorentzian(Real gamma);
};

/// The n_s unstructured sample locations {s_j}.
struct SampleSet {
    std::vector<Complex> locations;

    SampleSet() = default;
    explicit SampleSet(std::vector<Complex> locs);
    Index size() const { return static_cast<Index>(locations.size()); }
};

/// G(s, x). Errors out at kernel singularities (cauchy s == x, power x == 0,
/// lorentzian zero denominator). The power family is x^s = exp(s Log x) with
/// the principal logarithm, branch cut through x = -1 on the unit circle.
Complex eval_kernel(const Kernel& k, Complex s, Complex x);

/// dG/dx, analytic per family.
Complex kernel_x_derivative(const Kernel& k, Complex s, Complex x);

/// g(x) = [G(s_j, x)]_j
Vec assemble_vector(const Kernel& k, const SampleSet& s, Complex x);

/// ghat(x) = g(x) / ||g(x)||; zero vector is an error.
Vec assemble_normalized(const Kernel& k, const SampleSet& s, Complex x);

/// Column t = g(xs[t]) (or its normalization). The non-_serial versions run
/// the column loop with OpenMP; results are identical to the serial ones.
Mat assemble_matrix(const Kernel& k, const SampleSet& s, std::span<const Complex> xs);
Mat assemble_matrix_serial(const Kernel& k, const SampleSet& s, std::span<const Complex> xs);
Mat assemble_normalized_matrix(const Kernel& k, const SampleSet& s, std::span<const Complex> xs);
Mat assemble_normalized_matrix_serial(const Kernel& k, const SampleSet& s, std::span<const Complex> xs);

} // namespace em
