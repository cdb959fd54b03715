#include "spinsq/types.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace spinsq {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

char to_char(Direction d) {
  switch (d) {
    case Direction::X:
      return 'x';
    case Direction::Y:
      return 'y';
    case Direction::Z:
      return 'z';
  }
  return '?';
}

Direction parse_direction(std::string_view text) {
  const std::string t = lower(text);
  if (t == "x") return Direction::X;
  if (t == "y") return Direction::Y;
  if (t == "z") return Direction::Z;
  throw std::invalid_argument("unknown direction '" + std::string(text) + "' (expected x, y or z)");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::TS:
      return "ts";
    case Scheme::AP1:
      return "ap1";
    case Scheme::AP2:
      return "ap2";
    case Scheme::RP1:
      return "rp1";
    case Scheme::RP2:
      return "rp2";
  }
  return "?";
}

Scheme parse_scheme(std::string_view text) {
  const std::string t = lower(text);
  for (Scheme s : kSchemes) {
    if (to_string(s) == t) return s;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(text) +
                              "' (expected ts, ap1, ap2, rp1 or rp2)");
}

void Parameter::validate() const {
  std::array<bool, 3> seen{};
  for (Direction d : axes) seen[index_of(d)] = true;
  if (!(seen[0] && seen[1] && seen[2])) {
    throw std::invalid_argument("parameter axes must be a permutation of (x, y, z)");
  }
}

bool Parameter::needs_variance(Direction d) const {
  switch (kind) {
    case ParameterKind::A:
      return false;
    case ParameterKind::B:
      return true;
    case ParameterKind::C:
      return d == m();
    case ParameterKind::D:
      return d == k() || d == l();
  }
  return false;
}

std::string to_string(const Parameter& p) {
  std::string out(1, static_cast<char>('a' + static_cast<int>(p.kind)));
  const Parameter standard{p.kind, {Direction::X, Direction::Y, Direction::Z}};
  if ((p.kind == ParameterKind::C || p.kind == ParameterKind::D) && !(p == standard)) {
    out += ':';
    for (Direction d : p.axes) out += to_char(d);
  }
  return out;
}

Parameter parse_parameter(std::string_view text) {
  const std::string t = lower(text);
  if (t.empty() || t[0] < 'a' || t[0] > 'd') {
    throw std::invalid_argument("unknown parameter '" + std::string(text) +
                                "' (expected a, b, c or d)");
  }
  Parameter p;
  p.kind = static_cast<ParameterKind>(t[0] - 'a');
  if (t.size() == 1) return p;
  if (t[1] != ':') {
    throw std::invalid_argument("malformed parameter '" + std::string(text) + "'");
  }
  // Accept both "xyz" and "kxlymz" spellings.
  std::string axes;
  for (std::size_t i = 2; i < t.size(); ++i) {
    const char c = t[i];
    if (c == 'x' || c == 'y' || c == 'z') {
      axes += c;
    } else if (c != 'k' && c != 'l' && c != 'm') {
      throw std::invalid_argument("malformed parameter axes in '" + std::string(text) + "'");
    }
  }
  if (axes.size() != 3) {
    throw std::invalid_argument("parameter axes must name three directions: '" +
                                std::string(text) + "'");
  }
  for (std::size_t i = 0; i < 3; ++i) p.axes[i] = parse_direction(axes.substr(i, 1));
  p.validate();
  return p;
}

void validate_budget(Scheme scheme, const Budget& b) {
  switch (scheme) {
    case Scheme::TS:
    case Scheme::AP1:
      if (b.k < 2) {
        throw std::invalid_argument(to_string(scheme) + " requires K >= 2 (got " +
                                    std::to_string(b.k) + ")");
      }
      return;
    case Scheme::AP2:
      if (b.k < 2 || b.k % 2 != 0) {
        throw std::invalid_argument("ap2 requires an even K >= 2 (got " + std::to_string(b.k) +
                                    ")");
      }
      return;
    case Scheme::RP1:
      if (b.l < 2) {
        throw std::invalid_argument("rp1 requires L >= 2 (got " + std::to_string(b.l) + ")");
      }
      if (b.k < 1) {
        throw std::invalid_argument("rp1 requires K >= 1 (got " + std::to_string(b.k) + ")");
      }
      return;
    case Scheme::RP2:
      if (b.l < 2) {
        throw std::invalid_argument("rp2 requires L >= 2 (got " + std::to_string(b.l) + ")");
      }
      if (b.k < 2 || b.k % 2 != 0) {
        throw std::invalid_argument("rp2 requires an even K >= 2 (got " + std::to_string(b.k) +
                                    ")");
      }
      return;
  }
}

}  // namespace spinsq
