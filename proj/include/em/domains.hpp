#pragma once

#include <string_view>
#include <vector>

#include <em/types.hpp>

namespace em {

/// Reference parameter domain: the closed unit disk or the interval [-1, 1].
enum class ReferenceDomain { disk, interval };

const char*     to_string(ReferenceDomain d);
ReferenceDomain domain_from_string(std::string_view name);

/// phi(t) = center + scale * t from the reference domain onto X.
/// kind "identity" is the fixed map phi(t) = t kept distinct for config fidelity.
struct DomainMap {
    enum class Kind { identity, affine };
    Kind    kind   = Kind::identity;
    Complex center = {0, 0};
    Complex scale  = {1, 0};

    static DomainMap identity() { return {}; }
    static DomainMap affine(Complex center, Complex scale);
};

/// Probe nodes {a_t}: n_a-th roots of unity on the disk boundary, or
/// Chebyshev points of the first kind inside (-1, 1).
struct ProbeGrid {
    ReferenceDomain      domain = ReferenceDomain::disk;
    std::vector<Complex> nodes;

    Index size() const { return static_cast<Index>(nodes.size()); }
};

ProbeGrid probe_grid(ReferenceDomain d, Index n_a);

Complex map_forward(const DomainMap& m, Complex t);
Complex map_inverse(const DomainMap& m, Complex x);

/// Radial projection onto the disk / clamp of the real part onto [-1, 1].
Complex project_to_domain(ReferenceDomain d, Complex t);

/// Diameter of phi(reference domain); the unmatched-spike score penalty.
Real domain_diameter(const DomainMap& m);

} // namespace em
