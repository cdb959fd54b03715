#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace spinsq {

/// Cartesian measurement axis of the collective spin.
enum class Direction : std::uint8_t { X = 0, Y = 1, Z = 2 };

inline constexpr std::array<Direction, 3> kDirections{Direction::X, Direction::Y, Direction::Z};

constexpr std::size_t index_of(Direction d) { return static_cast<std::size_t>(d); }

char to_char(Direction d);
Direction parse_direction(std::string_view text);

/// The five measurement schemes: total spin, all pairs (two variants) and
/// random pairs (two variants).
enum class Scheme : std::uint8_t { TS, AP1, AP2, RP1, RP2 };

inline constexpr std::array<Scheme, 5> kSchemes{Scheme::TS, Scheme::AP1, Scheme::AP2, Scheme::RP1,
                                                Scheme::RP2};

std::string to_string(Scheme s);
Scheme parse_scheme(std::string_view text);

enum class ParameterKind : std::uint8_t { A, B, C, D };

/// Spin-squeezing parameter selector. `axes` is the permutation (k, l, m)
/// used by kinds C and D; the default is (x, y, z).
///
///   A = <Jx^2> + <Jy^2> + <Jz^2>
///   B = (dJx)^2 + (dJy)^2 + (dJz)^2
///   C = <Jk^2> + <Jl^2> - (N-1) (dJm)^2
///   D = (N-1) [(dJk)^2 + (dJl)^2] - <Jm^2>
struct Parameter {
  ParameterKind kind = ParameterKind::C;
  std::array<Direction, 3> axes{Direction::X, Direction::Y, Direction::Z};

  Direction k() const { return axes[0]; }
  Direction l() const { return axes[1]; }
  Direction m() const { return axes[2]; }

  /// Throws std::invalid_argument when `axes` is not a permutation.
  void validate() const;

  /// True when the parameter needs a variance (not only <J^2>) in direction d.
  bool needs_variance(Direction d) const;

  friend bool operator==(const Parameter&, const Parameter&) = default;
};

std::string to_string(const Parameter& p);

/// Parses "a", "b", "c", "d", optionally followed by ":kxlymz"-style axes,
/// e.g. "c:zxy" or "d:kzlxmy".
Parameter parse_parameter(std::string_view text);

/// Repetition budget. `k` is the per-pair (or per-direction for TS)
/// repetition count; `l` is the number of random pairs for RP schemes.
struct Budget {
  int k = 0;
  int l = 0;
  friend bool operator==(const Budget&, const Budget&) = default;
};

/// Checks the budget against the scheme's structural requirements
/// (K >= 2 for TS/AP, K even for AP2/RP2, L >= 2 for RP). Throws
/// std::invalid_argument with a precise message.
void validate_budget(Scheme scheme, const Budget& budget);

}  // namespace spinsq
