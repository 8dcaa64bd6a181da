#include "abmap/lp_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace abmap {

namespace {

constexpr std::size_t kTermsPerLine = 8;
constexpr std::size_t kNamesPerLine = 10;

std::string number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string var_name(const IntegerProgram& p, int j) {
  const auto& name = p.variables[static_cast<std::size_t>(j)].name;
  return name.empty() ? "x" + std::to_string(j) : name;
}

void write_terms(std::ostringstream& os, const IntegerProgram& p, const std::vector<Term>& terms) {
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (k > 0 && k % kTermsPerLine == 0) os << "\n   ";
    const double c = terms[k].coef;
    const bool negative = std::signbit(c) && c != 0.0;
    if (k == 0) os << (negative ? " - " : " ");
    else os << (negative ? " - " : " + ");
    os << number(std::abs(c)) << ' ' << var_name(p, terms[k].var);
  }
}

// ---------------------------------------------------------------------------
// Reader

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

enum class Section { kNone, kObjective, kConstraints, kBounds, kGeneral, kBinary, kEnd };

std::optional<std::pair<Section, bool>> section_header(std::string_view line) {
  std::string l = lower(line);
  // Collapse internal whitespace.
  std::string c;
  for (char ch : l) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!c.empty() && c.back() != ' ') c.push_back(' ');
    } else {
      c.push_back(ch);
    }
  }
  while (!c.empty() && c.back() == ' ') c.pop_back();
  if (c == "maximize" || c == "maximise" || c == "maximum" || c == "max") return {{Section::kObjective, true}};
  if (c == "minimize" || c == "minimise" || c == "minimum" || c == "min") return {{Section::kObjective, false}};
  if (c == "subject to" || c == "such that" || c == "st" || c == "s.t." || c == "st.") {
    return {{Section::kConstraints, false}};
  }
  if (c == "bounds" || c == "bound") return {{Section::kBounds, false}};
  if (c == "general" || c == "generals" || c == "gen" || c == "integer" || c == "integers") {
    return {{Section::kGeneral, false}};
  }
  if (c == "binary" || c == "binaries" || c == "bin") return {{Section::kBinary, false}};
  if (c == "end") return {{Section::kEnd, false}};
  return std::nullopt;
}

enum class Tok { kNumber, kName, kPlus, kMinus, kLe, kGe, kEq, kColon };

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
};

bool name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '[' || c == ']' || c == '{' ||
         c == '}' || c == '#' || c == '$' || c == '%' || c == '&' || c == '@' || c == '~' || c == '!' ||
         c == '"' || c == '\'' || c == '?' || c == '`' || c == '|' || c == ';' || c == ',' || c == '(' ||
         c == ')' || c == '/';
}
bool name_char(char c) {
  return name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '.';
}

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    if (c == '+') { out.push_back({Tok::kPlus, "+"}); ++i; continue; }
    if (c == '-') { out.push_back({Tok::kMinus, "-"}); ++i; continue; }
    if (c == ':') { out.push_back({Tok::kColon, ":"}); ++i; continue; }
    if (c == '<' || c == '>' || c == '=') {
      std::size_t j = i + 1;
      if (j < s.size() && (s[j] == '=' || s[j] == '<' || s[j] == '>')) ++j;
      std::string op(s.substr(i, j - i));
      Tok kind = Tok::kEq;
      if (op.find('<') != std::string::npos) kind = Tok::kLe;
      else if (op.find('>') != std::string::npos) kind = Tok::kGe;
      out.push_back({kind, op});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      Token t{Tok::kNumber, std::string(s.substr(i, j - i))};
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.value);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size()) {
        throw std::invalid_argument("LP parse: bad number '" + t.text + "'");
      }
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (name_start(c)) {
      std::size_t j = i;
      while (j < s.size() && name_char(s[j])) ++j;
      std::string text(s.substr(i, j - i));
      std::string l = lower(text);
      if (l == "inf" || l == "infinity") out.push_back({Tok::kNumber, text, kInf});
      else out.push_back({Tok::kName, text});
      i = j;
      continue;
    }
    throw std::invalid_argument(std::string("LP parse: unexpected character '") + c + "'");
  }
  return out;
}

class Reader {
 public:
  IntegerProgram program;

  int variable(const std::string& name) {
    auto it = index_.find(name);
    if (it != index_.end()) return it->second;
    Variable v;
    v.name = name;
    v.lower = 0.0;
    v.upper = kInf;
    int j = program.add_variable(std::move(v));
    index_.emplace(name, j);
    return j;
  }
  bool known(const std::string& name) const { return index_.count(name) != 0; }

 private:
  std::map<std::string, int> index_;
};

struct Cursor {
  const std::vector<Token>& toks;
  std::size_t pos = 0;
  bool done() const { return pos >= toks.size(); }
  const Token& peek(std::size_t ahead = 0) const {
    if (pos + ahead >= toks.size()) throw std::invalid_argument("LP parse: unexpected end of section");
    return toks[pos + ahead];
  }
  bool at(Tok k, std::size_t ahead = 0) const { return pos + ahead < toks.size() && toks[pos + ahead].kind == k; }
  const Token& next() {
    const Token& t = peek();
    ++pos;
    return t;
  }
};

// Optional "name:" prefix.
std::string label(Cursor& cur) {
  if (cur.at(Tok::kName) && cur.at(Tok::kColon, 1)) {
    std::string name = cur.next().text;
    cur.next();
    return name;
  }
  return {};
}

// Linear expression up to (not including) a relational operator, a label, or
// the end of the section.
std::vector<Term> expression(Cursor& cur, Reader& rd) {
  std::vector<Term> terms;
  while (!cur.done()) {
    if (cur.at(Tok::kLe) || cur.at(Tok::kGe) || cur.at(Tok::kEq)) break;
    if (cur.at(Tok::kName) && cur.at(Tok::kColon, 1)) break;
    double sign = 1.0;
    bool any_sign = false;
    while (cur.at(Tok::kPlus) || cur.at(Tok::kMinus)) {
      if (cur.next().kind == Tok::kMinus) sign = -sign;
      any_sign = true;
    }
    double coef = 1.0;
    if (cur.at(Tok::kNumber)) coef = cur.next().value;
    if (!cur.at(Tok::kName)) {
      if (any_sign || coef != 1.0) throw std::invalid_argument("LP parse: constant terms are not supported");
      throw std::invalid_argument("LP parse: expected a variable name");
    }
    int j = rd.variable(cur.next().text);
    terms.push_back({j, sign * coef});
  }
  return terms;
}

double signed_number(Cursor& cur) {
  double sign = 1.0;
  while (cur.at(Tok::kPlus) || cur.at(Tok::kMinus)) {
    if (cur.next().kind == Tok::kMinus) sign = -sign;
  }
  if (!cur.at(Tok::kNumber)) throw std::invalid_argument("LP parse: expected a number");
  return sign * cur.next().value;
}

void parse_bound_line(const std::vector<Token>& toks, Reader& rd) {
  Cursor cur{toks};
  auto var_ref = [&](const std::string& name) -> Variable& {
    return rd.program.variables[static_cast<std::size_t>(rd.variable(name))];
  };
  // "<var> free"
  if (toks.size() == 2 && toks[0].kind == Tok::kName && toks[1].kind == Tok::kName &&
      lower(toks[1].text) == "free") {
    Variable& v = var_ref(toks[0].text);
    v.lower = -kInf;
    v.upper = kInf;
    return;
  }
  if (cur.at(Tok::kName)) {
    Variable& v = var_ref(cur.next().text);
    Tok op = cur.next().kind;
    double value = signed_number(cur);
    if (op == Tok::kLe) v.upper = value;
    else if (op == Tok::kGe) v.lower = value;
    else if (op == Tok::kEq) v.lower = v.upper = value;
    else throw std::invalid_argument("LP parse: bad bound");
  } else {
    double lhs = signed_number(cur);
    Tok op1 = cur.next().kind;
    if (!cur.at(Tok::kName)) throw std::invalid_argument("LP parse: bound without variable");
    Variable& v = var_ref(cur.next().text);
    auto apply = [&](Tok op, double value, bool value_on_left) {
      if (op == Tok::kEq) { v.lower = v.upper = value; return; }
      bool is_lower = (op == Tok::kLe) == value_on_left;
      if (is_lower) v.lower = value;
      else v.upper = value;
    };
    apply(op1, lhs, true);
    if (!cur.done()) {
      Tok op2 = cur.next().kind;
      apply(op2, signed_number(cur), false);
    }
  }
  if (!cur.done()) throw std::invalid_argument("LP parse: trailing tokens in bound");
}

}  // namespace

std::string export_lp_text(const IntegerProgram& program) {
  std::ostringstream os;
  os << "\\ abmap integer program\n";
  os << "\\ variables: " << program.variables.size() << ", rows: " << program.constraints.size() << "\n";
  os << "Maximize\n obj:";
  {
    std::vector<Term> obj;
    for (std::size_t j = 0; j < program.variables.size(); ++j) {
      obj.push_back({static_cast<int>(j), program.variables[j].objective});
    }
    write_terms(os, program, obj);
  }
  os << "\nSubject To\n";
  for (std::size_t r = 0; r < program.constraints.size(); ++r) {
    const auto& c = program.constraints[r];
    const std::string base = c.name.empty() ? "r" + std::to_string(r) : c.name;
    std::vector<Term> terms = c.terms;
    if (terms.empty()) {
      if (program.variables.empty()) continue;
      terms.push_back({0, 0.0});
    }
    auto row = [&](const std::string& name, const char* op, double rhs) {
      os << ' ' << name << ':';
      write_terms(os, program, terms);
      os << ' ' << op << ' ' << number(rhs) << '\n';
    };
    const bool has_lo = std::isfinite(c.lower), has_hi = std::isfinite(c.upper);
    if (has_lo && has_hi && c.lower == c.upper) {
      row(base, "=", c.lower);
    } else if (has_lo && has_hi) {
      row(base + "_lo", ">=", c.lower);
      row(base + "_hi", "<=", c.upper);
    } else if (has_lo) {
      row(base, ">=", c.lower);
    } else if (has_hi) {
      row(base, "<=", c.upper);
    }
  }
  os << "Bounds\n";
  std::vector<int> integers, binaries;
  for (std::size_t j = 0; j < program.variables.size(); ++j) {
    const auto& v = program.variables[j];
    const std::string name = var_name(program, static_cast<int>(j));
    (v.kind == VarKind::kBinary ? binaries : integers).push_back(static_cast<int>(j));
    if (v.kind == VarKind::kBinary && v.lower == 0.0 && v.upper == 1.0) continue;
    const bool has_lo = std::isfinite(v.lower), has_hi = std::isfinite(v.upper);
    if (v.lower == v.upper) os << ' ' << name << " = " << number(v.lower) << '\n';
    else if (has_lo && has_hi) os << ' ' << number(v.lower) << " <= " << name << " <= " << number(v.upper) << '\n';
    else if (has_lo) os << ' ' << name << " >= " << number(v.lower) << '\n';
    else if (has_hi) os << " -inf <= " << name << " <= " << number(v.upper) << '\n';
    else os << ' ' << name << " free\n";
  }
  auto name_list = [&](const char* header, const std::vector<int>& vars) {
    if (vars.empty()) return;
    os << header << '\n';
    for (std::size_t k = 0; k < vars.size(); ++k) {
      os << ' ' << var_name(program, vars[k]);
      if ((k + 1) % kNamesPerLine == 0 || k + 1 == vars.size()) os << '\n';
    }
  };
  name_list("General", integers);
  name_list("Binary", binaries);
  os << "End\n";
  return os.str();
}

IntegerProgram parse_lp_text(std::string_view text) {
  Reader rd;
  Section section = Section::kNone;
  bool maximize = true;
  bool seen_objective = false;
  std::string objective_text, constraint_text;
  std::vector<std::string> bound_lines;
  std::vector<std::string> general_names, binary_names;

  std::size_t start = 0;
  while (start <= text.size() && section != Section::kEnd) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view line = text.substr(start, stop - start);
    start = stop + 1;
    if (auto cut = line.find('\\'); cut != std::string_view::npos) line = line.substr(0, cut);
    if (auto hdr = section_header(line)) {
      section = hdr->first;
      if (section == Section::kObjective) {
        maximize = hdr->second;
        seen_objective = true;
      } else if (!seen_objective) {
        throw std::invalid_argument("LP parse: missing objective section");
      }
      continue;
    }
    switch (section) {
      case Section::kNone:
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) {
          throw std::invalid_argument("LP parse: content before objective section");
        }
        break;
      case Section::kObjective: objective_text.append(line).push_back('\n'); break;
      case Section::kConstraints: constraint_text.append(line).push_back('\n'); break;
      case Section::kBounds:
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) bound_lines.emplace_back(line);
        break;
      case Section::kGeneral:
      case Section::kBinary:
        for (const auto& t : tokenize(line)) {
          if (t.kind != Tok::kName) throw std::invalid_argument("LP parse: expected variable names");
          (section == Section::kGeneral ? general_names : binary_names).push_back(t.text);
        }
        break;
      case Section::kEnd: break;
    }
    if (stop == text.size()) break;
  }

  {
    auto toks = tokenize(objective_text);
    Cursor cur{toks};
    label(cur);
    for (const auto& t : expression(cur, rd)) {
      auto& v = rd.program.variables[static_cast<std::size_t>(t.var)];
      v.objective += maximize ? t.coef : -t.coef;
    }
    if (!cur.done()) throw std::invalid_argument("LP parse: malformed objective");
  }
  {
    auto toks = tokenize(constraint_text);
    Cursor cur{toks};
    while (!cur.done()) {
      Constraint c;
      c.name = label(cur);
      if (c.name.empty()) c.name = "r" + std::to_string(rd.program.constraints.size());
      c.terms = expression(cur, rd);
      if (cur.done()) throw std::invalid_argument("LP parse: row " + c.name + " lacks a relation");
      Tok op = cur.next().kind;
      double rhs = signed_number(cur);
      if (op == Tok::kLe) c.upper = rhs;
      else if (op == Tok::kGe) c.lower = rhs;
      else c.lower = c.upper = rhs;
      rd.program.add_constraint(std::move(c));
    }
  }
  for (const auto& name : binary_names) {
    auto& v = rd.program.variables[static_cast<std::size_t>(rd.variable(name))];
    v.kind = VarKind::kBinary;
    v.lower = 0.0;
    v.upper = 1.0;
  }
  for (const auto& line : bound_lines) parse_bound_line(tokenize(line), rd);
  for (const auto& name : general_names) {
    rd.program.variables[static_cast<std::size_t>(rd.variable(name))].kind = VarKind::kInteger;
  }
  rd.program.validate();
  return std::move(rd.program);
}

}  // namespace abmap
