#pragma once

// On-disk cache of block spectra. One file per (L, labels, couplings,
// code version) key; layout, all little-endian host order:
//
//   char[8]  magic "RLXSPEC\0"
//   u32      format version
//   i32      L, m_z, k (-1 = none), p (0 = none)
//   f64[4]   couplings
//   u64      rows, cols
//   f64      energies[cols]
//   f64      vectors[rows * cols] as (re, im) pairs, column-major

#include "relax/error.hpp"
#include "relax/lattice_basis.hpp"
#include "relax/model.hpp"
#include "relax/spectral.hpp"
#include "relax/version.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>

namespace relax {

inline constexpr char kCacheMagic[8] = {'R', 'L', 'X', 'S', 'P', 'E', 'C', '\0'};
inline constexpr std::uint32_t kCacheFormatVersion = 1;

class Fnv1a {
public:
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    template <typename T>
    void value(const T& v) {
        bytes(&v, sizeof(T));
    }
    void text(const std::string& s) {
        value(static_cast<std::uint64_t>(s.size()));
        bytes(s.data(), s.size());
    }
    std::uint64_t digest() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t spectral_cache_key(int length, const SectorLabels& labels, const CouplingVector& g) {
    Fnv1a h;
    h.text(kCodeVersion);
    h.value(static_cast<std::int32_t>(length));
    h.value(static_cast<std::int32_t>(labels.m_z));
    h.value(static_cast<std::int32_t>(labels.k_index.value_or(-1)));
    h.value(static_cast<std::int32_t>(labels.spin_flip.value_or(0)));
    for (double c : {g.J1, g.gamma1, g.J2, g.gamma2}) h.value(std::bit_cast<std::uint64_t>(c));
    return h.digest();
}

class SpectralCache {
public:
    explicit SpectralCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

    const std::filesystem::path& directory() const { return dir_; }

    std::filesystem::path path_for(int length, const SectorLabels& labels, const CouplingVector& g) const {
        char name[32];
        std::snprintf(name, sizeof name, "%016llx.spec",
                      static_cast<unsigned long long>(spectral_cache_key(length, labels, g)));
        return dir_ / name;
    }

    /// Returns the cached decomposition, or nullopt when absent or stale.
    std::optional<SpectralDecomposition> load(int length, const SectorLabels& labels, const CouplingVector& g) const {
        std::ifstream in(path_for(length, labels, g), std::ios::binary);
        if (!in) return std::nullopt;
        char magic[8];
        std::uint32_t version = 0;
        std::int32_t hdr[4];
        double couplings[4];
        std::uint64_t rows = 0, cols = 0;
        in.read(magic, 8);
        read(in, version);
        in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
        in.read(reinterpret_cast<char*>(couplings), sizeof couplings);
        read(in, rows);
        read(in, cols);
        if (!in || std::memcmp(magic, kCacheMagic, 8) != 0 || version != kCacheFormatVersion) return std::nullopt;
        const double expect[4] = {g.J1, g.gamma1, g.J2, g.gamma2};
        if (hdr[0] != length || hdr[1] != labels.m_z || hdr[2] != labels.k_index.value_or(-1) ||
            hdr[3] != labels.spin_flip.value_or(0) || std::memcmp(couplings, expect, sizeof expect) != 0)
            return std::nullopt;
        SpectralDecomposition out;
        out.block_labels = labels;
        out.energies.resize(static_cast<Eigen::Index>(cols));
        out.vectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        in.read(reinterpret_cast<char*>(out.energies.data()), static_cast<std::streamsize>(cols * sizeof(double)));
        in.read(reinterpret_cast<char*>(out.vectors.data()),
                static_cast<std::streamsize>(rows * cols * sizeof(cplx)));
        if (!in) return std::nullopt;
        out.column_labels.assign(cols, labels);
        return out;
    }

    /// Writes atomically (temp file + rename).
    void store(int length, const SectorLabels& labels, const CouplingVector& g,
               const SpectralDecomposition& spec) const {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw Error(ErrorKind::Io, "cannot create cache directory " + dir_.string() + ": " + ec.message());
        const auto final_path = path_for(length, labels, g);
        auto tmp = final_path;
        tmp += ".tmp." + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
            const std::int32_t hdr[4] = {length, labels.m_z, labels.k_index.value_or(-1),
                                         labels.spin_flip.value_or(0)};
            const double couplings[4] = {g.J1, g.gamma1, g.J2, g.gamma2};
            const auto rows = static_cast<std::uint64_t>(spec.vectors.rows());
            const auto cols = static_cast<std::uint64_t>(spec.vectors.cols());
            out.write(kCacheMagic, 8);
            write(out, kCacheFormatVersion);
            out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
            out.write(reinterpret_cast<const char*>(couplings), sizeof couplings);
            write(out, rows);
            write(out, cols);
            out.write(reinterpret_cast<const char*>(spec.energies.data()),
                      static_cast<std::streamsize>(cols * sizeof(double)));
            out.write(reinterpret_cast<const char*>(spec.vectors.data()),
                      static_cast<std::streamsize>(rows * cols * sizeof(cplx)));
            if (!out) throw Error(ErrorKind::Io, "short write to " + tmp.string());
        }
        std::filesystem::rename(tmp, final_path, ec);
        if (ec) throw Error(ErrorKind::Io, "cannot rename cache file: " + ec.message());
    }

private:
    template <typename T>
    static void read(std::istream& in, T& v) {
        in.read(reinterpret_cast<char*>(&v), sizeof(T));
    }
    template <typename T>
    static void write(std::ostream& out, const T& v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }

    std::filesystem::path dir_;
};

}  // namespace relax
