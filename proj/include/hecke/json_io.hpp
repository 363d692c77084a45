#pragma once

// JSON shapes for elements, labels, tables and Hecke elements. Every number
// is a decimal string; every top-level object carries "v": 1.

#include "hecke/symplectic.hpp"

#include <json.hpp>

namespace hecke::io {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline json int_json(const Int &a) { return a.str(); }

inline Int parse_int(const json &j) {
  std::string s;
  if (j.is_string())
    s = j.get<std::string>();
  else if (j.is_number_integer())
    s = std::to_string(j.get<long long>());
  else
    throw ParseError("expected an integer (decimal string), got " + j.dump());
  std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  if (i == s.size() || s.find_first_not_of("0123456789", i) != std::string::npos)
    throw ParseError("not a decimal integer: \"" + s + "\"");
  return Int(s);
}

inline json rat_json(const Rat &q) { return to_string(q); }

inline Rat parse_rat(const json &j) {
  if (!j.is_string())
    return Rat(parse_int(j));
  const std::string s = j.get<std::string>();
  const auto slash = s.find('/');
  if (slash == std::string::npos)
    return Rat(parse_int(s));
  const Int den = parse_int(s.substr(slash + 1));
  if (den == 0)
    throw ParseError("zero denominator in \"" + s + "\"");
  return Rat(parse_int(s.substr(0, slash)), den);
}

template <class T, class F> json matrix_json(const Matrix<T> &m, F &&entry) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j)
      row.push_back(entry(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <class T, class F> Matrix<T> parse_matrix(const json &j, std::size_t n, F &&entry) {
  if (!j.is_array() || j.size() != n)
    throw ParseError("expected a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  Matrix<T> m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n)
      throw ParseError("matrix row " + std::to_string(i) + " has the wrong length");
    for (std::size_t k = 0; k < n; ++k)
      m(i, k) = entry(j[i][k]);
  }
  return m;
}

inline const json &field(const json &j, const char *key) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

inline void check_version(const json &j) {
  if (j.is_object() && j.contains("v") && !(j["v"].is_number_integer() && j["v"].get<int>() == kFormatVersion))
    throw ParseError("unsupported format version " + j["v"].dump());
}

inline Level parse_level(const json &j) {
  const Int n = parse_int(j);
  if (n < 1 || n > Int(std::numeric_limits<std::int64_t>::max()))
    throw LevelError("level out of range: " + n.str());
  return Level(static_cast<std::int64_t>(n));
}

inline json parse_text(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Orthogonal side

inline json to_json(const OrthoElement &e) {
  return {{"v", kFormatVersion}, {"N", int_json(e.level().value())}, {"dim", e.dim()},
          {"denom", int_json(e.denom())}, {"mat", matrix_json(e.mat(), int_json)}};
}

// Validates membership in SO_0(S_N) resp. SO_0(S^_N).
inline OrthoElement ortho_from_json(const json &j, std::optional<Level> level = std::nullopt) {
  check_version(j);
  const Level lv = j.contains("N") ? parse_level(j["N"]) : level.value_or(Level(1));
  if (level && !(lv == *level))
    throw ParseError("element level " + std::to_string(lv.n()) + " differs from --level " + std::to_string(level->n()));
  const json &dj = field(j, "dim");
  if (!dj.is_number_integer() || (dj.get<int>() != 3 && dj.get<int>() != 5))
    throw ParseError("dim must be 3 or 5");
  const int dim = dj.get<int>();
  const Int denom = j.contains("denom") ? parse_int(j["denom"]) : Int(1);
  if (denom < 1)
    throw ParseError("denom must be positive");
  const IntMat mat = parse_matrix<Int>(field(j, "mat"), dim, parse_int);
  return OrthoElement::make(build_form(lv, dim), mat, denom);
}

inline json to_json(const OrthoDoubleCosetLabel &l) {
  json inv = json::array();
  for (const Int &x : l.invariants)
    inv.push_back(int_json(x));
  return {{"dim", l.dim}, {"m", int_json(l.m)}, {"invariants", inv}};
}

inline OrthoDoubleCosetLabel ortho_label_from_json(const json &j) {
  const json &inv = field(j, "invariants");
  if (!inv.is_array() || (inv.size() != 3 && inv.size() != 5))
    throw ParseError("label needs 3 or 5 invariants");
  std::vector<Int> v;
  for (const auto &x : inv)
    v.push_back(parse_int(x));
  OrthoDoubleCosetLabel l;
  try {
    l = make_label(std::move(v));
  } catch (const InvariantError &e) {
    throw ParseError(e.what());
  }
  if (j.contains("m") && parse_int(j["m"]) != l.m)
    throw ParseError("label denominator does not match its invariants");
  return l;
}

inline json to_json(const RightCosetTable &t, const Level &level) {
  json reps = json::array();
  for (const auto &r : t.reps)
    reps.push_back(matrix_json(r.mat(), int_json));
  return {{"v", kFormatVersion}, {"N", int_json(level.value())}, {"label", to_json(t.label)},
          {"count", t.size()}, {"reps", reps}};
}

// Re-validates every representative: group membership, canonical right-coset
// shape, double coset, pairwise distinct cosets, count. Completeness: Gamma acts
// transitively on the right cosets of Gamma x Gamma, so a nonempty set of them
// closed under right multiplication by the generators is all of them.
inline RightCosetTable table_from_json(const json &j, const Level &level, const OrthoDoubleCosetLabel &label) {
  check_version(j);
  if (!(parse_level(field(j, "N")) == level))
    throw InvariantError("cached table belongs to another level");
  if (!(ortho_label_from_json(field(j, "label")) == label))
    throw InvariantError("cached table belongs to another label");
  const json &reps = field(j, "reps");
  if (!reps.is_array() || !field(j, "count").is_number_unsigned() || j["count"].get<std::size_t>() != reps.size())
    throw InvariantError("cached table count does not match its representatives");
  RightCosetTable t{label, {}, {}};
  const QuadForm s5 = build_form(level, 5);
  std::set<std::string> seen;
  for (const auto &r : reps) {
    const OrthoElement e = OrthoElement::make(s5, parse_matrix<Int>(r, 5, parse_int), label.m);
    const auto red = reduce_right_coset(e);
    if (!(red.canonical == e))
      throw InvariantError("cached representative is not in canonical right-coset form");
    if (!(double_coset_canonical(e) == label))
      throw InvariantError("cached representative lies in another double coset");
    if (!seen.insert(e.mat().str()).second)
      throw InvariantError("cached table repeats a right coset");
    t.forms.push_back(std::get<RightCosetForm5>(red.form));
    t.reps.push_back(e);
  }
  if (t.reps.empty())
    throw InvariantError("cached table is empty");
  const auto gens = detail::generator_pool5(level);
  for (const auto &r : t.reps)
    for (const auto &g : gens) {
      const auto moved = reduce_right_coset(r * OrthoElement::trusted(level, 5, g, 1)).canonical;
      if (!seen.count(moved.mat().str()))
        throw InvariantError("cached table is missing right cosets");
    }
  return t;
}

inline json to_json(const HeckeElement &x, const Level &level) {
  json terms = json::array();
  for (const auto &[l, c] : x.terms())
    terms.push_back({{"coeff", int_json(c)}, {"label", to_json(l)}});
  return {{"v", kFormatVersion}, {"N", int_json(level.value())}, {"group", "so5"}, {"terms", terms}};
}

inline HeckeElement hecke_element_from_json(const json &j) {
  check_version(j);
  HeckeElement x;
  for (const auto &t : field(j, "terms"))
    x.add(ortho_label_from_json(field(t, "label")), parse_int(field(t, "coeff")));
  return x;
}

// ---------------------------------------------------------------------------
// Symplectic side

inline json to_json(const SympElement &m) {
  return {{"v", kFormatVersion}, {"N", int_json(m.level().value())}, {"scale", int_json(m.scale())},
          {"mat", matrix_json(m.mat(), rat_json)}};
}

inline SympElement symp_from_json(const json &j, std::optional<Level> level = std::nullopt) {
  check_version(j);
  const Level lv = j.contains("N") ? parse_level(j["N"]) : level.value_or(Level(1));
  if (level && !(lv == *level))
    throw ParseError("element level " + std::to_string(lv.n()) + " differs from --level " + std::to_string(level->n()));
  const Int scale = j.contains("scale") ? parse_int(j["scale"]) : Int(1);
  return SympElement::make(lv, parse_matrix<Rat>(field(j, "mat"), 4, parse_rat), scale);
}

inline json to_json(const ParamodCosetLabel &l) {
  return {{"d", int_json(l.d)}, {"u1", int_json(l.u1)}, {"u2", int_json(l.u2)}, {"v", int_json(l.v)}};
}

inline ParamodCosetLabel paramod_label_from_json(const json &j) {
  return {parse_int(field(j, "d")), parse_int(field(j, "u1")), parse_int(field(j, "u2")), parse_int(field(j, "v"))};
}

inline json to_json(const SigmaStarLabel &l) { return {{"u", int_json(l.u)}, {"v", int_json(l.v)}}; }

inline json to_json(const ParamodHeckeElement &x, const Level &level) {
  json terms = json::array();
  for (const auto &[l, c] : x.terms())
    terms.push_back({{"coeff", int_json(c)}, {"label", to_json(l)}});
  return {{"v", kFormatVersion}, {"N", int_json(level.value())}, {"group", "param"}, {"terms", terms}};
}

inline ParamodHeckeElement paramod_element_from_json(const json &j) {
  check_version(j);
  ParamodHeckeElement x;
  for (const auto &t : field(j, "terms"))
    x.add(paramod_label_from_json(field(t, "label")), parse_int(field(t, "coeff")));
  return x;
}

} // namespace hecke::io
