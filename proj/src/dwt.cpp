#include "rigcast/dwt.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <ostream>

#include "rigcast/error.hpp"

namespace rigcast::dwt {

namespace {

constexpr std::array<double, 6> kDb3DecLo = {
    0.03522629188570953, -0.08544127388202666, -0.13501102001025458,
    0.45987750211849154, 0.8068915093110925,   0.33267055295008263};
constexpr std::array<double, 6> kDb3DecHi = {
    -0.33267055295008263, 0.8068915093110925,  -0.45987750211849154,
    -0.13501102001025458, 0.08544127388202666, 0.03522629188570953};
constexpr std::array<double, 6> kDb3RecLo = {
    0.33267055295008263,  0.8068915093110925,   0.45987750211849154,
    -0.13501102001025458, -0.08544127388202666, 0.03522629188570953};
constexpr std::array<double, 6> kDb3RecHi = {
    0.03522629188570953,  0.08544127388202666, -0.13501102001025458,
    -0.45987750211849154, 0.8068915093110925,  -0.33267055295008263};

constexpr std::array<double, 30> kCoif5DecLo = {
    -9.604010112767894e-08,  -1.6237995172048338e-07, 2.0612203985788783e-06,
    3.7007277113394796e-06,  -2.1270221672515614e-05, -4.12198619242655e-05,
    0.00014035632812373243,  0.0003018579416682448,   -0.0006375589261258812,
    -0.0016616273039298788,  0.0024315754425382886,   0.006761520220620417,
    -0.009159507338676163,   -0.019758391600965465,   0.032674799467057355,
    0.041287530472117834,    -0.10556315130733723,    -0.06203775157498196,
    0.4379823066591634,      0.7742936228603274,      0.42157126673075435,
    -0.052046670253554764,   -0.09192158806008609,    0.028169744270532353,
    0.023408322118927783,    -0.010131584846900276,   -0.00415931262757864,
    0.0021782943778456947,   0.0003585777411617577,   -0.000212081862067494};
constexpr std::array<double, 30> kCoif5DecHi = {
    0.000212081862067494,   0.0003585777411617577,  -0.0021782943778456947,
    -0.00415931262757864,   0.010131584846900276,   0.023408322118927783,
    -0.028169744270532353,  -0.09192158806008609,   0.052046670253554764,
    0.42157126673075435,    -0.7742936228603274,    0.4379823066591634,
    0.06203775157498196,    -0.10556315130733723,   -0.041287530472117834,
    0.032674799467057355,   0.019758391600965465,   -0.009159507338676163,
    -0.006761520220620417,  0.0024315754425382886,  0.0016616273039298788,
    -0.0006375589261258812, -0.0003018579416682448, 0.00014035632812373243,
    4.12198619242655e-05,   -2.1270221672515614e-05, -3.7007277113394796e-06,
    2.0612203985788783e-06, 1.6237995172048338e-07, -9.604010112767894e-08};
constexpr std::array<double, 30> kCoif5RecLo = {
    -0.000212081862067494,  0.0003585777411617577,  0.0021782943778456947,
    -0.00415931262757864,   -0.010131584846900276,  0.023408322118927783,
    0.028169744270532353,   -0.09192158806008609,   -0.052046670253554764,
    0.42157126673075435,    0.7742936228603274,     0.4379823066591634,
    -0.06203775157498196,   -0.10556315130733723,   0.041287530472117834,
    0.032674799467057355,   -0.019758391600965465,  -0.009159507338676163,
    0.006761520220620417,   0.0024315754425382886,  -0.0016616273039298788,
    -0.0006375589261258812, 0.0003018579416682448,  0.00014035632812373243,
    -4.12198619242655e-05,  -2.1270221672515614e-05, 3.7007277113394796e-06,
    2.0612203985788783e-06, -1.6237995172048338e-07, -9.604010112767894e-08};
constexpr std::array<double, 30> kCoif5RecHi = {
    -9.604010112767894e-08, 1.6237995172048338e-07, 2.0612203985788783e-06,
    -3.7007277113394796e-06, -2.1270221672515614e-05, 4.12198619242655e-05,
    0.00014035632812373243, -0.0003018579416682448, -0.0006375589261258812,
    0.0016616273039298788,  0.0024315754425382886,  -0.006761520220620417,
    -0.009159507338676163,  0.019758391600965465,   0.032674799467057355,
    -0.041287530472117834,  -0.10556315130733723,   0.06203775157498196,
    0.4379823066591634,     -0.7742936228603274,    0.42157126673075435,
    0.052046670253554764,   -0.09192158806008609,   -0.028169744270532353,
    0.023408322118927783,   0.010131584846900276,   -0.00415931262757864,
    -0.0021782943778456947, 0.0003585777411617577,  0.000212081862067494};

// bior2.4: analysis low-pass has 9 taps, padded with a leading zero to 10.
constexpr std::array<double, 10> kBior24DecLo = {
    0.0, 0.03314563036811941, -0.06629126073623882, -0.1767766952966369, 0.4198446513295126,
    0.9943689110435825, 0.4198446513295126, -0.1767766952966369, -0.06629126073623882,
    0.03314563036811941};
constexpr std::array<double, 10> kBior24DecHi = {
    0.0, 0.0, 0.0, 0.3535533905932738, -0.7071067811865476, 0.3535533905932738, 0.0, 0.0, 0.0, 0.0};
constexpr std::array<double, 10> kBior24RecLo = {
    0.0, 0.0, 0.0, 0.3535533905932738, 0.7071067811865476, 0.3535533905932738, 0.0, 0.0, 0.0, 0.0};
constexpr std::array<double, 10> kBior24RecHi = {
    0.0, -0.03314563036811941, -0.06629126073623882, 0.1767766952966369, 0.4198446513295126,
    -0.9943689110435825, 0.4198446513295126, 0.1767766952966369, -0.06629126073623882,
    -0.03314563036811941};

const FilterBank kDb3{kDb3DecLo, kDb3DecHi, kDb3RecLo, kDb3RecHi};
const FilterBank kCoif5{kCoif5DecLo, kCoif5DecHi, kCoif5RecLo, kCoif5RecHi};
const FilterBank kBior24{kBior24DecLo, kBior24DecHi, kBior24RecLo, kBior24RecHi};

// Half-sample symmetric extension: x[-1] = x[0], x[n] = x[n-1]. Valid for
// indices in [-n, 2n).
inline double extended(std::span<const double> x, std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  if (i < 0) return x[static_cast<std::size_t>(-i - 1)];
  if (i >= n) return x[static_cast<std::size_t>(2 * n - i - 1)];
  return x[static_cast<std::size_t>(i)];
}

// One analysis stage: approx and detail, each of length (n + F - 1) / 2.
void analysis_step(std::span<const double> x, const FilterBank& fb, std::span<double> approx,
                   std::span<double> detail) {
  const auto f = static_cast<std::ptrdiff_t>(fb.length());
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto out_len = static_cast<std::ptrdiff_t>(approx.size());
  for (std::ptrdiff_t k = 0; k < out_len; ++k) {
    const std::ptrdiff_t center = 2 * k + 1;
    double a = 0.0;
    double d = 0.0;
    if (center - (f - 1) >= 0 && center < n) {
      const double* xp = x.data() + center;
      for (std::ptrdiff_t j = 0; j < f; ++j) {
        a += fb.dec_lo[j] * xp[-j];
        d += fb.dec_hi[j] * xp[-j];
      }
    } else {
      for (std::ptrdiff_t j = 0; j < f; ++j) {
        const double v = extended(x, center - j);
        a += fb.dec_lo[j] * v;
        d += fb.dec_hi[j] * v;
      }
    }
    approx[k] = a;
    detail[k] = d;
  }
}

// One synthesis stage; writes out.size() samples (at most 2N - F + 2).
void synthesis_step(std::span<const double> approx, std::span<const double> detail,
                    const FilterBank& fb, std::span<double> out) {
  const auto f = static_cast<std::ptrdiff_t>(fb.length());
  const auto n = static_cast<std::ptrdiff_t>(approx.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    // Full upsampled convolution evaluated at m = k + F - 2.
    const auto m = static_cast<std::ptrdiff_t>(k) + f - 2;
    double acc = 0.0;
    // Terms with 0 <= m - 2i < F.
    const std::ptrdiff_t i_lo = std::max<std::ptrdiff_t>(0, (m - f + 2) / 2);
    const std::ptrdiff_t i_hi = std::min<std::ptrdiff_t>(n - 1, m / 2);
    for (std::ptrdiff_t i = i_lo; i <= i_hi; ++i) {
      const auto j = m - 2 * i;
      if (j < 0 || j >= f) continue;
      acc += approx[i] * fb.rec_lo[j] + detail[i] * fb.rec_hi[j];
    }
    out[k] = acc;
  }
}

void check_feasible(std::size_t segment_length, const WaveletSpec& spec) {
  const int max = max_level(segment_length, spec.family);
  if (spec.level < 1 || spec.level > max) {
    throw DecompositionError("level " + std::to_string(spec.level) + " " +
                                 std::string(family_name(spec.family)) + " decomposition of " +
                                 std::to_string(segment_length) +
                                 " samples is infeasible; maximum feasible level is " +
                                 std::to_string(max),
                             max);
  }
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Db3: return "db3";
    case Family::Coif5: return "coif5";
    case Family::Bior24: return "bior2.4";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "db3") return Family::Db3;
  if (name == "coif5") return Family::Coif5;
  if (name == "bior2.4") return Family::Bior24;
  throw ConfigurationError("unknown wavelet family '" + std::string(name) + "'");
}

const FilterBank& filters(Family f) {
  switch (f) {
    case Family::Db3: return kDb3;
    case Family::Coif5: return kCoif5;
    case Family::Bior24: return kBior24;
  }
  return kBior24;
}

int max_level(std::size_t segment_length, Family family) {
  const std::size_t f = filters(family).length();
  int level = 0;
  std::size_t n = segment_length;
  while (n >= f && level < 64) {
    n = (n + f - 1) / 2;
    ++level;
  }
  return level;
}

std::vector<std::size_t> subband_lengths(std::size_t segment_length, const WaveletSpec& spec) {
  check_feasible(segment_length, spec);
  const std::size_t f = filters(spec.family).length();
  std::vector<std::size_t> per_level;  // detail_1 .. detail_L
  std::size_t n = segment_length;
  for (int l = 0; l < spec.level; ++l) {
    n = (n + f - 1) / 2;
    per_level.push_back(n);
  }
  std::vector<std::size_t> out;
  out.push_back(per_level.back());
  for (auto it = per_level.rbegin(); it != per_level.rend(); ++it) out.push_back(*it);
  return out;
}

std::size_t coefficient_length(std::size_t segment_length, const WaveletSpec& spec) {
  const auto bands = subband_lengths(segment_length, spec);
  std::size_t total = 0;
  for (auto b : bands) total += b;
  return total;
}

void decompose_into(std::span<const double> segment, const WaveletSpec& spec, std::span<double> out,
                    std::vector<double>& scratch) {
  const auto bands = subband_lengths(segment.size(), spec);
  std::size_t total = 0;
  for (auto b : bands) total += b;
  if (out.size() != total) throw ShapeError("decompose output buffer has wrong length");
  const auto& fb = filters(spec.family);

  // Detail bands fill `out` from the back; the running approximation lives
  // in two halves of `scratch`.
  const std::size_t first = (segment.size() + fb.length() - 1) / 2;
  scratch.resize(2 * first);
  std::span<double> cur(scratch.data(), first);
  std::span<double> next(scratch.data() + first, first);
  std::span<const double> input = segment;
  std::size_t tail = total;
  for (int l = 0; l < spec.level; ++l) {
    const std::size_t len = (input.size() + fb.length() - 1) / 2;
    tail -= len;
    auto approx = cur.first(len);
    analysis_step(input, fb, approx, out.subspan(tail, len));
    input = approx;
    std::swap(cur, next);
  }
  std::copy(input.begin(), input.end(), out.begin());
}

std::vector<double> decompose(std::span<const double> segment, const WaveletSpec& spec) {
  std::vector<double> out(coefficient_length(segment.size(), spec));
  std::vector<double> scratch;
  decompose_into(segment, spec, out, scratch);
  return out;
}

std::vector<double> reconstruct(std::span<const double> coefficients, std::size_t original_length,
                                const WaveletSpec& spec) {
  const auto bands = subband_lengths(original_length, spec);
  std::size_t total = 0;
  for (auto b : bands) total += b;
  if (coefficients.size() != total) {
    throw ShapeError("expected " + std::to_string(total) + " coefficients for " +
                     std::to_string(original_length) + " samples, got " +
                     std::to_string(coefficients.size()));
  }
  const auto& fb = filters(spec.family);

  std::vector<double> approx(coefficients.begin(), coefficients.begin() + bands[0]);
  std::size_t offset = bands[0];
  for (std::size_t b = 1; b < bands.size(); ++b) {
    const auto detail = coefficients.subspan(offset, bands[b]);
    offset += bands[b];
    // Target length is the next detail band, or the original length at the end.
    const std::size_t target = b + 1 < bands.size() ? bands[b + 1] : original_length;
    std::vector<double> out(target);
    synthesis_step(approx, detail, fb, out);
    approx = std::move(out);
  }
  return approx;
}

void write_filter_reference(std::ostream& out) {
  const auto flags = out.flags();
  out << std::setprecision(17);
  for (auto fam : {Family::Db3, Family::Coif5, Family::Bior24}) {
    const auto& fb = filters(fam);
    out << "# " << family_name(fam) << " (length " << fb.length() << ")\n";
    const std::pair<const char*, std::span<const double>> rows[] = {
        {"dec_lo", fb.dec_lo}, {"dec_hi", fb.dec_hi}, {"rec_lo", fb.rec_lo}, {"rec_hi", fb.rec_hi}};
    for (const auto& [name, taps] : rows) {
      out << name;
      for (double t : taps) out << ' ' << t;
      out << '\n';
    }
    out << '\n';
  }
  out.flags(flags);
}

}  // namespace rigcast::dwt
