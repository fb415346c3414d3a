#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "galga/detail/sobol_table.hpp"
#include "galga/error.hpp"
#include "galga/rng.hpp"
#include "galga/space.hpp"
#include "galga/types.hpp"

namespace galga {

/// Points in [0,1]^D. `seed` is set only for randomized generators.
struct UnitPointSet {
    Matrix points;
    std::size_t dim = 0;
    std::optional<std::uint64_t> seed;

    std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
};

inline constexpr std::size_t kMaxVertexDim = 20;

/// Number of nodes added by the initial design and by each density
/// iteration: 5 * 2^D.
inline std::size_t design_size(std::size_t dim) { return std::size_t{5} << dim; }

/// Plain Latin hypercube: every axis is cut into `count` equal strata and
/// each stratum receives exactly one point, placed uniformly at random
/// inside the stratum.
inline UnitPointSet latin_hypercube(std::size_t dim, std::size_t count, std::uint64_t seed)
{
    if (dim < 1) throw InvalidArgument("latin_hypercube: dim must be >= 1");
    if (count < 1) throw InvalidArgument("latin_hypercube: count must be >= 1");

    Xoshiro256 rng(seed);
    UnitPointSet out{Matrix(count, dim), dim, seed};
    std::vector<std::size_t> perm(count);
    const double width = 1.0 / static_cast<double>(count);
    for (std::size_t d = 0; d < dim; ++d) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = count - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        for (std::size_t i = 0; i < count; ++i) {
            const auto k = static_cast<double>(perm[i]);
            double c = (k + rng.uniform()) * width;
            // rounding may push c onto the upper stratum edge
            const double upper = (k + 1.0) * width;
            if (c >= upper) c = std::nextafter(upper, 0.0);
            if (c < k * width) c = k * width;
            out.points(i, d) = c;
        }
    }
    return out;
}

/// All 2^D corners of the unit hypercube. Corner i has coordinate d equal to
/// bit (D-1-d) of i, i.e. lexicographic order of the binary expansion.
inline UnitPointSet hypercube_vertices(std::size_t dim)
{
    if (dim < 1) throw InvalidArgument("hypercube_vertices: dim must be >= 1");
    if (dim > kMaxVertexDim)
        throw CapacityError("hypercube_vertices: dim " + std::to_string(dim) + " exceeds " +
                            std::to_string(kMaxVertexDim));
    const std::size_t n = std::size_t{1} << dim;
    UnitPointSet out{Matrix(n, dim), dim, std::nullopt};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) out.points(i, d) = ((i >> (dim - 1 - d)) & 1U) ? 1.0 : 0.0;
    return out;
}

namespace detail {

inline constexpr int kSobolBits = 32;

/// Parsed Joe-Kuo records, one per dimension: primitive polynomial bits and
/// initial direction integers m_1..m_s.
struct SobolRecord {
    std::uint32_t poly = 1;
    std::vector<std::uint32_t> m;
};

inline const std::vector<SobolRecord>& sobol_records()
{
    static const std::vector<SobolRecord> records = [] {
        std::vector<SobolRecord> r;
        r.reserve(kSobolMaxDim);
        const char* p = kSobolTable;
        while (*p) {
            SobolRecord rec;
            char* end = nullptr;
            rec.poly = static_cast<std::uint32_t>(std::strtoul(p, &end, 10));
            p = end;
            while (*p == ' ') {
                rec.m.push_back(static_cast<std::uint32_t>(std::strtoul(p + 1, &end, 10)));
                p = end;
            }
            if (*p == ';') ++p;
            r.push_back(std::move(rec));
        }
        return r;
    }();
    return records;
}

/// Direction integers V_k (k = 0..31) for one dimension, scaled to 32 bits.
inline std::array<std::uint32_t, kSobolBits> sobol_directions(const SobolRecord& rec)
{
    std::array<std::uint32_t, kSobolBits> v{};
    const int s = static_cast<int>(rec.m.size());
    if (s == 0) {
        for (int k = 0; k < kSobolBits; ++k) v[k] = std::uint32_t{1} << (kSobolBits - 1 - k);
        return v;
    }
    const std::uint32_t a = (rec.poly >> 1) & ((std::uint32_t{1} << (s - 1)) - 1);
    for (int k = 0; k < s && k < kSobolBits; ++k) v[k] = rec.m[k] << (kSobolBits - 1 - k);
    for (int k = s; k < kSobolBits; ++k) {
        std::uint32_t x = v[k - s] ^ (v[k - s] >> s);
        for (int j = 1; j < s; ++j)
            if ((a >> (s - 1 - j)) & 1U) x ^= v[k - j];
        v[k] = x;
    }
    return v;
}

}  // namespace detail

/// Unscrambled Sobol points 1..count (the all-zero point 0 is skipped), Gray
/// code ordering, Joe-Kuo direction numbers.
inline UnitPointSet sobol_sequence(std::size_t dim, std::size_t count)
{
    if (dim < 1 || dim > detail::kSobolMaxDim)
        throw InvalidArgument("sobol_sequence: dim must be in [1, " + std::to_string(detail::kSobolMaxDim) + "]");
    if (count < 1) throw InvalidArgument("sobol_sequence: count must be >= 1");
    if (count >= (std::size_t{1} << detail::kSobolBits))
        throw CapacityError("sobol_sequence: count exceeds 2^32 - 1");

    const auto& records = detail::sobol_records();
    std::vector<std::array<std::uint32_t, detail::kSobolBits>> dirs(dim);
    for (std::size_t d = 0; d < dim; ++d) dirs[d] = detail::sobol_directions(records[d]);

    UnitPointSet out{Matrix(count, dim), dim, std::nullopt};
    std::vector<std::uint32_t> x(dim, 0);
    for (std::size_t i = 1; i <= count; ++i) {
        // index of the rightmost zero bit of i-1
        std::size_t c = 0;
        for (std::size_t v = i - 1; v & 1U; v >>= 1) ++c;
        for (std::size_t d = 0; d < dim; ++d) {
            x[d] ^= dirs[d][c];
            out.points(i - 1, d) = static_cast<double>(x[d]) * 0x1.0p-32;
        }
    }
    return out;
}

/// Maps unit-cube points to physical coordinates of `space`.
inline Matrix scale_to_space(const UnitPointSet& points, const InputSpace& space)
{
    if (points.dim != space.dim())
        throw DimensionMismatch("scale_to_space: point dim " + std::to_string(points.dim) +
                                " vs space dim " + std::to_string(space.dim()));
    return space.scale_rows(points.points);
}

}  // namespace galga
