#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pve/common.hpp"

namespace pve {

/// Exact sum of nonnegative doubles in 128-bit fixed point (quantum 2^-72).
/// Addition of quantized values is exactly associative and commutative, so
/// shard merges are bit-identical regardless of order or shard count.
class FixedSum {
  public:
    void add(double v) { acc_ += quantize(v); }
    void merge(const FixedSum& o) { acc_ += o.acc_; }
    double value() const { return static_cast<double>(static_cast<long double>(acc_) * 0x1.0p-72L); }
    bool operator==(const FixedSum& o) const { return acc_ == o.acc_; }
    static FixedSum from_double(double v) {
        FixedSum s;
        s.acc_ = quantize(v);
        return s;
    }

  private:
    static __int128 quantize(double v) {
        // v * 2^72 is exact in long double for |v| < 2^56 (power-of-two scale).
        return static_cast<__int128>(static_cast<long double>(v) * 0x1.0p72L);
    }
    __int128 acc_ = 0;
};

/// Mergeable streaming empirical CDF over [0, r_cap) with `bins` uniform bins,
/// an overflow tally above r_cap, and exact running first/second moments.
class EcdfAccumulator {
  public:
    EcdfAccumulator(uint32_t bins, double r_cap) : r_cap_(r_cap), counts_(bins, 0) {
        if (bins < 1 || !(r_cap > 0.0)) throw ConfigError("EcdfAccumulator: bins >= 1 and r_cap > 0 required");
    }

    /// Rebuild from serialized parts (moment sums round-trip through double).
    static EcdfAccumulator from_parts(uint32_t bins, double r_cap, std::vector<uint64_t> counts,
                                      uint64_t overflow, double sum, double sum_sq) {
        if (counts.size() != bins) throw DataError("EcdfAccumulator::from_parts: counts/bins mismatch");
        EcdfAccumulator acc(bins, r_cap);
        acc.counts_ = std::move(counts);
        acc.overflow_ = overflow;
        acc.n_ = overflow;
        for (uint64_t c : acc.counts_) acc.n_ += c;
        acc.sum_ = FixedSum::from_double(sum);
        acc.sum_sq_ = FixedSum::from_double(sum_sq);
        return acc;
    }

    void add(double value) {
        if (!(value >= 0.0) || !std::isfinite(value)) {
            throw DataError("EcdfAccumulator::add: value must be finite and >= 0, got " +
                            std::to_string(value));
        }
        if (value >= r_cap_) {
            ++overflow_;
        } else {
            auto bin = static_cast<size_t>(value / r_cap_ * static_cast<double>(counts_.size()));
            if (bin >= counts_.size()) bin = counts_.size() - 1;
            ++counts_[bin];
        }
        ++n_;
        sum_.add(value);
        sum_sq_.add(value * value);
    }

    /// ECDF with the right-continuous step convention: fraction of samples in
    /// bins up to and including the bin containing x.
    double eval(double x) const {
        if (n_ == 0) throw DataError("EcdfAccumulator::eval: empty accumulator");
        if (x < 0.0) return 0.0;
        // Above the grid only the non-overflow mass is known to be <= x.
        if (x >= r_cap_) return static_cast<double>(n_ - overflow_) / static_cast<double>(n_);
        auto bin = static_cast<size_t>(x / r_cap_ * static_cast<double>(counts_.size()));
        if (bin >= counts_.size()) bin = counts_.size() - 1;
        uint64_t cum = 0;
        for (size_t j = 0; j <= bin; ++j) cum += counts_[j];
        return static_cast<double>(cum) / static_cast<double>(n_);
    }

    void merge(const EcdfAccumulator& o) {
        if (o.counts_.size() != counts_.size() || o.r_cap_ != r_cap_) {
            throw ConfigError("EcdfAccumulator::merge: mismatched grids");
        }
        for (size_t j = 0; j < counts_.size(); ++j) counts_[j] += o.counts_[j];
        overflow_ += o.overflow_;
        n_ += o.n_;
        sum_.merge(o.sum_);
        sum_sq_.merge(o.sum_sq_);
    }

    /// (mean, raw second moment) from the exact running sums.
    std::pair<double, double> moments() const {
        if (n_ == 0) throw DataError("EcdfAccumulator::moments: empty accumulator");
        const auto n = static_cast<double>(n_);
        return {sum_.value() / n, sum_sq_.value() / n};
    }

    /// ECDF evaluated at every bin upper edge (exact there, no quantization).
    std::vector<double> ecdf_at_edges() const {
        if (n_ == 0) throw DataError("EcdfAccumulator: empty accumulator");
        std::vector<double> out(counts_.size());
        uint64_t cum = 0;
        for (size_t j = 0; j < counts_.size(); ++j) {
            cum += counts_[j];
            out[j] = static_cast<double>(cum) / static_cast<double>(n_);
        }
        return out;
    }

    double upper_edge(size_t j) const {
        return r_cap_ * static_cast<double>(j + 1) / static_cast<double>(counts_.size());
    }

    uint32_t bins() const { return static_cast<uint32_t>(counts_.size()); }
    double r_cap() const { return r_cap_; }
    uint64_t n() const { return n_; }
    uint64_t overflow() const { return overflow_; }
    double overflow_fraction() const { return n_ == 0 ? 0.0 : static_cast<double>(overflow_) / static_cast<double>(n_); }
    const std::vector<uint64_t>& counts() const { return counts_; }
    const FixedSum& sum() const { return sum_; }
    const FixedSum& sum_sq() const { return sum_sq_; }

  private:
    double r_cap_;
    std::vector<uint64_t> counts_;
    uint64_t overflow_ = 0;
    uint64_t n_ = 0;
    FixedSum sum_;
    FixedSum sum_sq_;
};

}  // namespace pve
