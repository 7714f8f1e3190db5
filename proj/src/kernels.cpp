#include <em/kernels.hpp>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <em/parallel.hpp>

namespace em {

namespace {

[[noreturn]] void singular(const char* fam, Complex s, Complex x) {
    std::ostringstream os;
    os << "kernel " << fam << " singular at s=(" << s.real() << "," << s.imag()
       << "), x=(" << x.real() << "," << x.imag() << ")";
    throw std::invalid_argument(os.str());
}

constexpr Real kPi = 3.141592653589793238462643383279502884;

} // namespace

const char* to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::cauchy:     return "cauchy";
        case KernelFamily::power:      return "power";
        case KernelFamily::fourier:    return "fourier";
        case KernelFamily::laplace:    return "laplace";
        case KernelFamily::lorentzian: return "lorentzian";
    }
    return "?";
}

KernelFamily kernel_family_from_string(std::string_view name) {
    if (name == "cauchy")     return KernelFamily::cauchy;
    if (name == "power")      return KernelFamily::power;
    if (name == "fourier")    return KernelFamily::fourier;
    if (name == "laplace")    return KernelFamily::laplace;
    if (name == "lorentzian") return KernelFamily::lorentzian;
    throw std::invalid_argument("unknown kernel family: " + std::string(name));
}

Kernel Kernel::lorentzian(Real gamma) {
    if (!(gamma > 0))
        throw std::invalid_argument("lorentzian: gamma must be positive");
    return {KernelFamily::lorentzian, gamma};
}

SampleSet::SampleSet(std::vector<Complex> locs) : locations(std::move(locs)) {
    if (locations.empty())
        throw std::invalid_argument("SampleSet: needs at least one location");
    for (const Complex& s : locations)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw std::invalid_argument("SampleSet: non-finite location");
}

Complex eval_kernel(const Kernel& k, Complex s, Complex x) {
    switch (k.family) {
        case KernelFamily::cauchy: {
            const Complex d = s - x;
            if (d == Complex(0, 0)) singular("cauchy", s, x);
            return Complex(1, 0) / d;
        }
        case KernelFamily::power: {
            if (x == Complex(0, 0)) singular("power", s, x);
            return std::exp(s * std::log(x));
        }
        case KernelFamily::fourier:
            return std::exp(Complex(0, kPi) * s * x);
        case KernelFamily::laplace:
            return x * std::exp(-s * x);
        case KernelFamily::lorentzian: {
            const Complex d = s - x;
            const Complex den = Complex(1, 0) + k.gamma * d * d;
            if (den == Complex(0, 0)) singular("lorentzian", s, x);
            return Complex(1, 0) / den;
        }
    }
    throw std::logic_error("eval_kernel: bad family");
}

Complex kernel_x_derivative(const Kernel& k, Complex s, Complex x) {
    switch (k.family) {
        case KernelFamily::cauchy: {
            const Complex d = s - x;
            if (d == Complex(0, 0)) singular("cauchy", s, x);
            return Complex(1, 0) / (d * d);
        }
        case KernelFamily::power: {
            if (x == Complex(0, 0)) singular("power", s, x);
            return s * std::exp((s - Complex(1, 0)) * std::log(x));
        }
        case KernelFamily::fourier: {
            const Complex ipis = Complex(0, kPi) * s;
            return ipis * std::exp(ipis * x);
        }
        case KernelFamily::laplace:
            return (Complex(1, 0) - s * x) * std::exp(-s * x);
        case KernelFamily::lorentzian: {
            const Complex d = s - x;
            const Complex den = Complex(1, 0) + k.gamma * d * d;
            if (den == Complex(0, 0)) singular("lorentzian", s, x);
            return 2.0 * k.gamma * d / (den * den);
        }
    }
    throw std::logic_error("kernel_x_derivative: bad family");
}

Vec assemble_vector(const Kernel& k, const SampleSet& s, Complex x) {
    Vec g(s.size());
    for (Index j = 0; j < s.size(); ++j)
        g(j) = eval_kernel(k, s.locations[static_cast<size_t>(j)], x);
    return g;
}

Vec assemble_normalized(const Kernel& k, const SampleSet& s, Complex x) {
    Vec g = assemble_vector(k, s, x);
    const Real n = g.norm();
    if (n == 0)
        throw std::invalid_argument("assemble_normalized: kernel vector is zero");
    return g / n;
}

namespace {

template <bool Normalized>
Mat assemble_impl(const Kernel& k, const SampleSet& s, std::span<const Complex> xs,
                  bool parallel) {
    Mat m(s.size(), static_cast<Index>(xs.size()));
    auto column = [&](Index t) {
        if constexpr (Normalized)
            m.col(t) = assemble_normalized(k, s, xs[static_cast<size_t>(t)]);
        else
            m.col(t) = assemble_vector(k, s, xs[static_cast<size_t>(t)]);
    };
    if (parallel)
        parallel_for(m.cols(), column);
    else
        for (Index t = 0; t < m.cols(); ++t) column(t);
    return m;
}

} // namespace

Mat assemble_matrix(const Kernel& k, const SampleSet& s, std::span<const Complex> xs) {
    return assemble_impl<false>(k, s, xs, true);
}
Mat assemble_matrix_serial(const Kernel& k, const SampleSet& s, std::span<const Complex> xs) {
    return assemble_impl<false>(k, s, xs, false);
}
Mat assemble_normalized_matrix(const Kernel& k, const SampleSet& s, std::span<const Complex> xs) {
    return assemble_impl<true>(k, s, xs, true);
}
Mat assemble_normalized_matrix_serial(const Kernel& k, const SampleSet& s, std::span<const Complex> xs) {
    return assemble_impl<true>(k, s, xs, false);
}

} // namespace em
