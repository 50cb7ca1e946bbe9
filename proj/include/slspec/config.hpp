#pragma once

// INI-style problem documents:
//
//   [interval]
//   a = 0
//   b = 1
//   alpha = -pi/2
//
//   [coefficients.p]
//   piece1 = 0, 1, constant 1
//
//   [coefficients.delta]
//   piece1 = 0, 1/3, constant 1
//   piece2 = 1/3, 2/3, constant 0
//   piece3 = 2/3, 1, table 3 2/3:1 0.8:1.5 0.9:1.6 1:2
//
//   [quadrature]           (optional)
//   ode_tol = 1e-12
//
//   [boundary]             (optional)
//   tau = sqrt

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "slspec/problem.hpp"

namespace slspec {

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline double parse_plain(const std::string& s) {
  if (s == "pi") return std::numbers::pi;
  if (s.size() > 2 && s.ends_with("pi")) {
    std::string head = s.substr(0, s.size() - 2);
    if (head.ends_with('*')) head.pop_back();
    return parse_plain(head) * std::numbers::pi;
  }
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("parse failure: '" + s + "' is not a number");
  }
  if (used != s.size()) throw ConfigError("parse failure: '" + s + "' is not a number");
  return v;
}

}  // namespace detail

/// Parses "1.5", "-2e-3", "1/3", "-pi/2", "3*pi/4", "2pi".
inline double parse_number(std::string_view text) {
  std::string s = detail::trim(text);
  if (s.empty()) throw ConfigError("parse failure: empty number");
  double sign = 1;
  if (s[0] == '-' || s[0] == '+') {
    if (s[0] == '-') sign = -1;
    s = detail::trim(s.substr(1));
  }
  const auto slash = s.find('/');
  if (slash == std::string::npos) return sign * detail::parse_plain(s);
  const double num = detail::parse_plain(detail::trim(s.substr(0, slash)));
  const double den = detail::parse_plain(detail::trim(s.substr(slash + 1)));
  if (den == 0) throw ConfigError("parse failure: division by zero in '" + std::string(text) + "'");
  return sign * num / den;
}

/// Parses "t0, t1, <rule>" where rule is "constant v", "poly c0 c1 ..." or
/// "table order t:v t:v ...".
inline Piece parse_piece(std::string_view text) {
  const auto c1 = text.find(',');
  const auto c2 = c1 == std::string_view::npos ? c1 : text.find(',', c1 + 1);
  if (c2 == std::string_view::npos) throw ConfigError("parse failure: piece needs 't0, t1, rule': " + std::string(text));
  Piece pc;
  pc.t0 = parse_number(text.substr(0, c1));
  pc.t1 = parse_number(text.substr(c1 + 1, c2 - c1 - 1));
  std::istringstream rule(detail::trim(text.substr(c2 + 1)));
  std::string kind;
  rule >> kind;
  std::string tok;
  if (kind == "constant") {
    if (!(rule >> tok)) throw ConfigError("parse failure: constant rule needs a value");
    pc.rule = ConstantRule{parse_number(tok)};
  } else if (kind == "poly") {
    PolynomialRule poly;
    while (rule >> tok) poly.coeffs.push_back(parse_number(tok));
    pc.rule = std::move(poly);
  } else if (kind == "table") {
    TableRule tab;
    if (!(rule >> tok)) throw ConfigError("parse failure: table rule needs an order");
    tab.order = static_cast<int>(parse_number(tok));
    while (rule >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ConfigError("parse failure: table sample '" + tok + "' is not t:v");
      tab.t.push_back(parse_number(tok.substr(0, colon)));
      tab.v.push_back(parse_number(tok.substr(colon + 1)));
    }
    pc.rule = std::move(tab);
  } else {
    throw ConfigError("parse failure: unknown coefficient rule '" + kind + "'");
  }
  return pc;
}

namespace detail {

using boost::property_tree::ptree;

inline const ptree& section(const ptree& root, const std::string& name) {
  // Section names contain dots, so look them up literally rather than as paths.
  const auto it = root.find(name);
  if (it == root.not_found()) throw ConfigError("parse failure: missing section [" + name + "]");
  return it->second;
}

inline double required_number(const ptree& sec, const std::string& sec_name, const std::string& key) {
  const auto it = sec.find(key);
  if (it == sec.not_found()) throw ConfigError("parse failure: missing key '" + key + "' in [" + sec_name + "]");
  return parse_number(it->second.data());
}

inline CoefficientFn parse_coefficient(const ptree& root, const std::string& name) {
  const auto& sec = section(root, name);
  std::vector<Piece> pieces;
  for (const auto& [key, value] : sec) {
    if (!key.starts_with("piece")) throw ConfigError("parse failure: unexpected key '" + key + "' in [" + name + "]");
    pieces.push_back(parse_piece(value.data()));
  }
  return CoefficientFn(std::move(pieces));
}

inline ptree parse_tree(const std::string& text) {
  ptree root;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("parse failure: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return root;
}

}  // namespace detail

/// Builds and validates a problem from a configuration document.
inline SLProblem load_problem(const std::string& config_text) {
  const auto root = detail::parse_tree(config_text);
  const auto& interval = detail::section(root, "interval");
  const double a = detail::required_number(interval, "interval", "a");
  const double b = detail::required_number(interval, "interval", "b");
  const double alpha = detail::required_number(interval, "interval", "alpha");
  if (!(a < b)) throw ConfigError("degenerate interval: require a < b");
  QuadConfig quad;
  if (const auto it = root.find("quadrature"); it != root.not_found()) {
    for (const auto& [key, value] : it->second) {
      const double v = parse_number(value.data());
      if (key == "abs_tol") quad.abs_tol = v;
      else if (key == "rel_tol") quad.rel_tol = v;
      else if (key == "ode_tol") quad.ode_tol = v;
      else if (key == "max_subdivisions") quad.max_subdivisions = static_cast<int>(v);
      else throw ConfigError("parse failure: unknown key '" + key + "' in [quadrature]");
    }
  }
  return SLProblem(a, b, alpha, detail::parse_coefficient(root, "coefficients.p"),
                   detail::parse_coefficient(root, "coefficients.q"),
                   detail::parse_coefficient(root, "coefficients.delta"), quad);
}

/// The optional "[boundary] tau = ..." entry.
inline std::optional<std::string> load_tau_text(const std::string& config_text) {
  const auto root = detail::parse_tree(config_text);
  const auto it = root.find("boundary");
  if (it == root.not_found()) return std::nullopt;
  const auto tau = it->second.find("tau");
  if (tau == it->second.not_found()) return std::nullopt;
  return detail::trim(tau->second.data());
}

/// -y'' = lambda y on [0, 1] with y'(0) = 0 (alpha = -pi/2).
inline SLProblem free_problem(QuadConfig quad = {}) {
  return SLProblem(0, 1, -std::numbers::pi / 2, CoefficientFn::constant(0, 1, 1), CoefficientFn::constant(0, 1, 0),
                   CoefficientFn::constant(0, 1, 1), quad);
}

/// Free problem whose weight vanishes on the middle third of [0, 1].
inline SLProblem middle_third_problem(QuadConfig quad = {}) {
  CoefficientFn delta({Piece{0, 1.0 / 3, ConstantRule{1}}, Piece{1.0 / 3, 2.0 / 3, ConstantRule{0}},
                       Piece{2.0 / 3, 1, ConstantRule{1}}});
  return SLProblem(0, 1, -std::numbers::pi / 2, CoefficientFn::constant(0, 1, 1), CoefficientFn::constant(0, 1, 0),
                   std::move(delta), quad);
}

}  // namespace slspec
