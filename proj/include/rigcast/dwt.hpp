#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rigcast::dwt {

enum class Family { Db3, Coif5, Bior24 };

std::string_view family_name(Family f);  // "db3", "coif5", "bior2.4"
Family parse_family(std::string_view name);

// Decomposition and reconstruction filter pairs, stored in convolution order.
struct FilterBank {
  std::span<const double> dec_lo;
  std::span<const double> dec_hi;
  std::span<const double> rec_lo;
  std::span<const double> rec_hi;

  std::size_t length() const { return dec_lo.size(); }
};

const FilterBank& filters(Family f);

// Padding is always half-sample symmetric extension.
struct WaveletSpec {
  Family family = Family::Bior24;
  int level = 3;

  bool operator==(const WaveletSpec&) const = default;
};

// Subband lengths in output order: approx_L, detail_L, ..., detail_1.
std::vector<std::size_t> subband_lengths(std::size_t segment_length, const WaveletSpec& spec);

// Deepest level whose every stage input is at least the filter length.
int max_level(std::size_t segment_length, Family family);

std::size_t coefficient_length(std::size_t segment_length, const WaveletSpec& spec);

// Concatenation [approx_L, detail_L, detail_{L-1}, ..., detail_1].
std::vector<double> decompose(std::span<const double> segment, const WaveletSpec& spec);

// Writes into `out`, which must have coefficient_length() elements. `scratch`
// is resized as needed; reuse it across calls to avoid allocations.
void decompose_into(std::span<const double> segment, const WaveletSpec& spec, std::span<double> out,
                    std::vector<double>& scratch);

std::vector<double> reconstruct(std::span<const double> coefficients, std::size_t original_length,
                                const WaveletSpec& spec);

// Plain-text dump of every filter bank with 17 significant digits.
void write_filter_reference(std::ostream& out);

}  // namespace rigcast::dwt
