#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dlsmc/rng.hpp"

namespace dlsmc {

// Sobol' low-discrepancy sequence in up to 16 dimensions, Gray-code ordering,
// 32 bits of resolution. Index 0 (the origin) is always skipped; an optional
// digital shift (XOR scramble) decorrelates independent grids while keeping
// the net structure intact. Deterministic for fixed (dimension, shift seed,
// index).
class SobolSequence {
public:
    static constexpr int kMaxDim = 16;
    static constexpr int kBits = 32;

    explicit SobolSequence(int dim, std::uint64_t shift_seed = 0) : dim_(dim) {
        if (dim < 1 || dim > kMaxDim)
            throw std::out_of_range("SobolSequence: dimension exceeds direction table capacity");
        v_.assign(static_cast<std::size_t>(dim) * kBits, 0u);
        state_.assign(dim, 0u);
        shift_.assign(dim, 0u);

        // Dimension 1: v_k = 2^{-k}.
        for (int k = 0; k < kBits; ++k) v_[k] = 1u << (kBits - 1 - k);

        // Remaining dimensions from the primitive-polynomial table.
        for (int j = 1; j < dim; ++j) {
            const DirectionRow& row = table()[j - 1];
            std::uint32_t m[kBits];
            for (int k = 0; k < row.degree; ++k) m[k] = row.m[k];
            for (int k = row.degree; k < kBits; ++k) {
                std::uint32_t value = m[k - row.degree] ^ (m[k - row.degree] << row.degree);
                for (int i = 1; i < row.degree; ++i)
                    if ((row.a >> (row.degree - 1 - i)) & 1u) value ^= m[k - i] << i;
                m[k] = value;
            }
            for (int k = 0; k < kBits; ++k)
                v_[static_cast<std::size_t>(j) * kBits + k] = m[k] << (kBits - 1 - k);
        }

        if (shift_seed != 0) {
            std::uint64_t s = shift_seed;
            for (int j = 0; j < dim; ++j)
                shift_[j] = static_cast<std::uint32_t>(splitmix64(s) >> 32);
        }
    }

    int dimension() const { return dim_; }
    std::uint64_t index() const { return index_; }

    // Writes the next point into out[0..dim).
    void next(std::span<double> out) {
        ++index_;
        int bit = 0;
        std::uint64_t n = index_;
        while (!(n & 1u)) {
            ++bit;
            n >>= 1;
        }
        for (int j = 0; j < dim_; ++j) {
            state_[j] ^= v_[static_cast<std::size_t>(j) * kBits + bit];
            out[j] = static_cast<double>(state_[j] ^ shift_[j]) * 0x1.0p-32;
        }
    }

    // Next `count` points as a row-major count x dim matrix.
    std::vector<double> next_points(std::size_t count) {
        std::vector<double> points(count * static_cast<std::size_t>(dim_));
        for (std::size_t i = 0; i < count; ++i)
            next(std::span<double>(points.data() + i * dim_, dim_));
        return points;
    }

private:
    struct DirectionRow {
        int degree;
        std::uint32_t a;
        std::uint32_t m[8];
    };

    // Joe–Kuo direction numbers for dimensions 2..16.
    static std::span<const DirectionRow> table() {
        static constexpr DirectionRow rows[] = {
            {1, 0, {1}},
            {2, 1, {1, 3}},
            {3, 1, {1, 3, 1}},
            {3, 2, {1, 1, 1}},
            {4, 1, {1, 1, 3, 3}},
            {4, 4, {1, 3, 5, 13}},
            {5, 2, {1, 1, 5, 5, 17}},
            {5, 4, {1, 1, 5, 5, 5}},
            {5, 7, {1, 1, 7, 11, 19}},
            {5, 11, {1, 1, 5, 1, 1}},
            {5, 13, {1, 1, 1, 3, 11}},
            {5, 14, {1, 3, 5, 5, 31}},
            {6, 1, {1, 3, 3, 9, 7, 49}},
            {6, 13, {1, 1, 5, 13, 3, 35}},
            {6, 16, {1, 3, 1, 13, 25, 5}},
        };
        return rows;
    }

    int dim_;
    std::uint64_t index_ = 0;
    std::vector<std::uint32_t> v_;
    std::vector<std::uint32_t> state_;
    std::vector<std::uint32_t> shift_;
};

}  // namespace dlsmc
