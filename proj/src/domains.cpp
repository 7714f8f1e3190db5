#include <em/domains.hpp>

#include <cmath>
#include <stdexcept>

namespace em {

namespace {
constexpr Real kPi = 3.141592653589793238462643383279502884;
}

const char* to_string(ReferenceDomain d) {
    return d == ReferenceDomain::disk ? "disk" : "interval";
}

ReferenceDomain domain_from_string(std::string_view name) {
    if (name == "disk")     return ReferenceDomain::disk;
    if (name == "interval") return ReferenceDomain::interval;
    throw std::invalid_argument("unknown reference domain: " + std::string(name));
}

DomainMap DomainMap::affine(Complex center, Complex scale) {
    if (scale == Complex(0, 0))
        throw std::invalid_argument("DomainMap: scale must be nonzero");
    return {Kind::affine, center, scale};
}

ProbeGrid probe_grid(ReferenceDomain d, Index n_a) {
    if (n_a < 1)
        throw std::invalid_argument("probe_grid: n_a must be at least 1");
    ProbeGrid g;
    g.domain = d;
    g.nodes.reserve(static_cast<size_t>(n_a));
    if (d == ReferenceDomain::disk) {
        for (Index t = 0; t < n_a; ++t) {
            const Real th = 2.0 * kPi * static_cast<Real>(t) / static_cast<Real>(n_a);
            g.nodes.emplace_back(std::cos(th), std::sin(th));
        }
    } else {
        // Chebyshev points of the first kind, open grid in (-1, 1)
        for (Index t = 1; t <= n_a; ++t) {
            const Real th = (2.0 * static_cast<Real>(t) - 1.0) * kPi /
                            (2.0 * static_cast<Real>(n_a));
            g.nodes.emplace_back(std::cos(th), 0.0);
        }
    }
    return g;
}

Complex map_forward(const DomainMap& m, Complex t) {
    if (m.kind == DomainMap::Kind::identity) return t;
    return m.center + m.scale * t;
}

Complex map_inverse(const DomainMap& m, Complex x) {
    if (m.kind == DomainMap::Kind::identity) return x;
    return (x - m.center) / m.scale;
}

Complex project_to_domain(ReferenceDomain d, Complex t) {
    if (d == ReferenceDomain::disk) {
        const Real r = std::abs(t);
        return r <= 1.0 ? t : t / r;
    }
    Real re = t.real();
    if (re < -1.0) re = -1.0;
    if (re > 1.0) re = 1.0;
    return {re, 0.0};
}

Real domain_diameter(const DomainMap& m) {
    return 2.0 * std::abs(m.scale);
}

} // namespace em
