#pragma once

// Spin-1/2 chain configurations, magnetization sectors and translation /
// spin-flip symmetry-adapted bases.
//
// Encoding: site j (0-based) is bit j, bit set means spin up. The translation
// T shifts every spin by one site (j -> j+1 mod L), i.e. a left rotation of
// the L-bit word. A symmetrized block state with momentum index k is
//
//     |rep; k, p> ∝ sum_r e^{+i 2 pi k r / L} T^r (1 + p X) |rep>
//
// so that T |rep; k, p> = e^{-i 2 pi k / L} |rep; k, p>.

#include "relax/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace relax {

using Bits = std::uint64_t;
using cplx = std::complex<double>;

inline constexpr std::size_t kDefaultDimensionCap = 20000;
inline constexpr int kMaxLength = 62;

struct SpinConfiguration {
    Bits bits = 0;
    int length = 0;

    int popcount() const { return std::popcount(bits); }
    /// Total magnetization with S^Z eigenvalues +-1.
    int magnetization() const { return 2 * popcount() - length; }
    bool spin_up(int site) const { return (bits >> site) & 1U; }

    friend bool operator==(const SpinConfiguration&, const SpinConfiguration&) = default;
};

struct SectorLabels {
    int m_z = 0;
    std::optional<int> k_index;    // momentum 2 pi k / L; nullopt = translation unused
    std::optional<int> spin_flip;  // +1 / -1; nullopt = spin flip unused

    friend bool operator==(const SectorLabels&, const SectorLabels&) = default;
};

inline std::string to_string(const SectorLabels& labels) {
    std::string s = "mz=" + std::to_string(labels.m_z);
    s += labels.k_index ? ",k=" + std::to_string(*labels.k_index) : ",k=none";
    s += labels.spin_flip ? ",p=" + std::to_string(*labels.spin_flip) : ",p=none";
    return s;
}

inline Bits length_mask(int length) {
    return length >= 64 ? ~Bits{0} : ((Bits{1} << length) - 1);
}

/// T^r c: moves the spin at site j to site j + r (mod L).
inline Bits translate(Bits c, int length, int r) {
    r %= length;
    if (r < 0) r += length;
    if (r == 0) return c;
    const Bits mask = length_mask(length);
    return ((c << r) | (c >> (length - r))) & mask;
}

inline Bits flip_all(Bits c, int length) { return ~c & length_mask(length); }

inline std::size_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    double acc = 1.0;
    for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
    return static_cast<std::size_t>(std::llround(acc));
}

inline void validate_sector(int length, int m_z) {
    if (length < 2 || length > kMaxLength)
        throw Error(ErrorKind::InvalidArgument, "chain length must lie in [2, 62], got " + std::to_string(length));
    if (std::abs(m_z) > length)
        throw Error(ErrorKind::InvalidArgument, "|m_z| exceeds L");
    if ((length + m_z) % 2 != 0)
        throw Error(ErrorKind::InvalidParity, "L + m_z must be even (L=" + std::to_string(length) +
                                                  ", m_z=" + std::to_string(m_z) + ")");
}

/// All configurations with magnetization m_z, ascending by integer value.
inline std::vector<Bits> enumerate_sector(int length, int m_z, std::size_t cap = kDefaultDimensionCap) {
    validate_sector(length, m_z);
    const int n_up = (length + m_z) / 2;
    const std::size_t count = binomial(length, n_up);
    if (count > cap)
        throw Error(ErrorKind::SizeLimit, "sector dimension " + std::to_string(count) + " exceeds cap " +
                                              std::to_string(cap));
    std::vector<Bits> states;
    states.reserve(count);
    if (n_up == 0) {
        states.push_back(0);
        return states;
    }
    // Gosper's hack walks same-popcount words in increasing order.
    Bits c = (Bits{1} << n_up) - 1;
    const Bits limit = length >= 64 ? ~Bits{0} : (Bits{1} << length);
    while (c < limit) {
        states.push_back(c);
        const Bits lowest = c & (~c + 1);
        const Bits ripple = c + lowest;
        if (ripple == 0) break;
        c = (((ripple ^ c) >> 2) / lowest) | ripple;
    }
    return states;
}

struct OrbitElement {
    SpinConfiguration rep;
    int shift = 0;         // rep = T^shift X^flipped c
    bool flipped = false;
};

/// Minimal configuration over the orbit of the translation group (times the
/// spin flip when requested), with one group element mapping c to it.
inline OrbitElement orbit_representative(SpinConfiguration c, bool use_spin_flip) {
    OrbitElement best{c, 0, false};
    for (int z = 0; z < (use_spin_flip ? 2 : 1); ++z) {
        const Bits base = z ? flip_all(c.bits, c.length) : c.bits;
        for (int r = 0; r < c.length; ++r) {
            const Bits t = translate(base, c.length, r);
            if (t < best.rep.bits) best = {{t, c.length}, r, z == 1};
        }
    }
    return best;
}

/// Smallest r > 0 with T^r c = c.
inline int translation_period(Bits c, int length) {
    for (int r = 1; r < length; ++r)
        if (translate(c, length, r) == c) return r;
    return length;
}

/// Basis of one symmetry block, stored together with its embedding into the
/// plain m_z sector: every sector configuration belongs to at most one block
/// state, so the embedding is a column-orthonormal matrix with one nonzero
/// per row.
struct SymmetricBasis {
    int length = 0;
    SectorLabels labels;
    std::vector<Bits> representatives;
    std::vector<int> periodicities;
    std::vector<double> norms;

    std::vector<Bits> sector_states;         // ascending
    std::vector<std::int64_t> block_index;   // per sector state, -1 if projected out
    std::vector<cplx> amplitude;             // <config | block state>

    std::size_t dim() const { return representatives.size(); }
    std::size_t sector_dim() const { return sector_states.size(); }

    std::int64_t sector_index(Bits c) const {
        auto it = std::lower_bound(sector_states.begin(), sector_states.end(), c);
        if (it == sector_states.end() || *it != c) return -1;
        return static_cast<std::int64_t>(it - sector_states.begin());
    }

    bool is_plain_sector() const { return !labels.k_index && !labels.spin_flip; }
};

inline void validate_labels(int length, const SectorLabels& labels) {
    validate_sector(length, labels.m_z);
    if (labels.k_index && (*labels.k_index < 0 || *labels.k_index >= length))
        throw Error(ErrorKind::InvalidArgument, "momentum index must lie in [0, L)");
    if (labels.spin_flip) {
        if (*labels.spin_flip != 1 && *labels.spin_flip != -1)
            throw Error(ErrorKind::InvalidArgument, "spin_flip must be +1 or -1");
        if (labels.m_z != 0)
            throw Error(ErrorKind::InvalidArgument, "spin-flip label requires m_z = 0");
    }
}

inline SymmetricBasis build_symmetric_basis(int length, const SectorLabels& labels,
                                            std::size_t cap = kDefaultDimensionCap) {
    validate_labels(length, labels);
    SymmetricBasis basis;
    basis.length = length;
    basis.labels = labels;
    basis.sector_states = enumerate_sector(length, labels.m_z, cap);
    const std::size_t n = basis.sector_states.size();
    basis.block_index.assign(n, -1);
    basis.amplitude.assign(n, cplx{0.0, 0.0});

    const bool use_t = labels.k_index.has_value();
    const bool use_x = labels.spin_flip.has_value();
    const int n_shifts = use_t ? length : 1;
    const double theta = use_t ? 2.0 * std::numbers::pi * (*labels.k_index) / length : 0.0;
    const double parity = use_x ? static_cast<double>(*labels.spin_flip) : 1.0;

    std::vector<std::pair<Bits, cplx>> orbit;
    for (std::size_t i = 0; i < n; ++i) {
        const Bits c = basis.sector_states[i];
        orbit.clear();
        bool minimal = true;
        for (int z = 0; z < (use_x ? 2 : 1) && minimal; ++z) {
            const Bits base = z ? flip_all(c, length) : c;
            for (int r = 0; r < n_shifts; ++r) {
                const Bits t = translate(base, length, r);
                if (t < c) {
                    minimal = false;
                    break;
                }
                const cplx chi = std::polar(1.0, theta * r) * (z ? parity : 1.0);
                auto it = std::find_if(orbit.begin(), orbit.end(), [t](const auto& e) { return e.first == t; });
                if (it == orbit.end())
                    orbit.emplace_back(t, chi);
                else
                    it->second += chi;
            }
        }
        if (!minimal) continue;
        double norm_sq = 0.0;
        for (const auto& [t, a] : orbit) norm_sq += std::norm(a);
        const double norm = std::sqrt(norm_sq);
        if (norm < 1e-8) continue;  // projection vanishes for these quantum numbers

        const auto b = static_cast<std::int64_t>(basis.representatives.size());
        basis.representatives.push_back(c);
        basis.periodicities.push_back(use_t ? translation_period(c, length) : 1);
        basis.norms.push_back(norm);
        for (const auto& [t, a] : orbit) {
            if (std::abs(a) < 1e-12) continue;
            const auto idx = basis.sector_index(t);
            basis.block_index[idx] = b;
            basis.amplitude[idx] = a / norm;
        }
    }
    return basis;
}

/// Every block label covering the m_z sector (all momenta, both flip parities
/// when m_z = 0 and use_spin_flip is set).
inline std::vector<SectorLabels> sector_block_labels(int length, int m_z, bool use_spin_flip) {
    std::vector<SectorLabels> out;
    const bool flip = use_spin_flip && m_z == 0;
    for (int k = 0; k < length; ++k) {
        if (flip) {
            out.push_back({m_z, k, 1});
            out.push_back({m_z, k, -1});
        } else {
            out.push_back({m_z, k, std::nullopt});
        }
    }
    return out;
}

/// Block vector -> plain m_z-sector vector.
inline Eigen::VectorXcd embed_vector(const Eigen::VectorXcd& v, const SymmetricBasis& basis) {
    if (static_cast<std::size_t>(v.size()) != basis.dim())
        throw Error(ErrorKind::DimensionMismatch, "block vector length " + std::to_string(v.size()) +
                                                      " != basis dim " + std::to_string(basis.dim()));
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.sector_dim()));
    for (std::size_t i = 0; i < basis.sector_dim(); ++i)
        if (basis.block_index[i] >= 0) out[i] = basis.amplitude[i] * v[basis.block_index[i]];
    return out;
}

/// Embeds every column of a block matrix.
inline Eigen::MatrixXcd embed_columns(const Eigen::MatrixXcd& m, const SymmetricBasis& basis) {
    if (static_cast<std::size_t>(m.rows()) != basis.dim())
        throw Error(ErrorKind::DimensionMismatch, "block matrix rows != basis dim");
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis.sector_dim()), m.cols());
    for (std::size_t i = 0; i < basis.sector_dim(); ++i)
        if (basis.block_index[i] >= 0) out.row(i) = basis.amplitude[i] * m.row(basis.block_index[i]);
    return out;
}

/// Plain m_z-sector vector -> block coordinates (orthogonal projection).
inline Eigen::VectorXcd project_vector(const Eigen::VectorXcd& full, const SymmetricBasis& basis) {
    if (static_cast<std::size_t>(full.size()) != basis.sector_dim())
        throw Error(ErrorKind::DimensionMismatch, "sector vector length != sector dim");
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dim()));
    for (std::size_t i = 0; i < basis.sector_dim(); ++i)
        if (basis.block_index[i] >= 0) out[basis.block_index[i]] += std::conj(basis.amplitude[i]) * full[i];
    return out;
}

}  // namespace relax
