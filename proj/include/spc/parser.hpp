#pragma once

// Protocol specification parser and serializer. The format is line oriented:
//
//   protocol woo_lam_pi3
//   roles A, B, S
//   nonces Nb
//   keys Kas, Kbs
//   keypair Ka_pub, Ka_priv
//   knows A: A, B, S, Kas
//   secrets: Nb
//   1. A -> B : {Nb}sk(Kas)
//
// '#' starts a line comment. Knowledge and secret lists are comma separated;
// a pair used as a single list element must be parenthesized. Message
// payloads take the whole term grammar, with ',' right-associated.

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spc/strand.hpp"
#include "spc/term.hpp"

namespace spc {

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity{Severity::Error};
  std::size_t line{0};  // 1-based
  std::size_t col{0};   // 1-based
  std::string message;

  std::string str() const {
    std::ostringstream os;
    os << (severity == Severity::Error ? "error" : "warning") << " at " << line << ":" << col
       << ": " << message;
    return os.str();
  }
};

struct ParseResult {
  std::optional<Protocol> protocol;
  std::vector<Diagnostic> diagnostics;

  bool ok() const {
    if (!protocol) return false;
    return std::none_of(diagnostics.begin(), diagnostics.end(),
                        [](const Diagnostic& d) { return d.severity == Severity::Error; });
  }
};

/// Raw text plus the parse outcome and the line each message came from.
struct SpecDocument {
  std::string text;
  ParseResult result;
  std::vector<std::size_t> message_lines;
};

namespace detail {

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

/// Recursive-descent term parser over a single line slice.
class TermParser {
 public:
  TermParser(std::string_view text, std::size_t line, std::size_t col_base,
             const std::map<std::string, Sort>& sorts, std::vector<Diagnostic>& diags)
      : s_(text), line_(line), col_base_(col_base), sorts_(sorts), diags_(diags) {}

  std::optional<Term> parse_full() {
    auto t = parse_term();
    skip_ws();
    if (t && pos_ != s_.size()) {
      error(pos_, "unexpected trailing input after term");
      return std::nullopt;
    }
    return t;
  }

  /// Comma-separated list of non-pair elements (knowledge, secrets).
  std::optional<std::vector<Term>> parse_list() {
    std::vector<Term> out;
    auto first = parse_simple();
    if (!first) return std::nullopt;
    out.push_back(*first);
    skip_ws();
    while (pos_ < s_.size() && s_[pos_] == ',') {
      ++pos_;
      auto next = parse_simple();
      if (!next) return std::nullopt;
      out.push_back(*next);
      skip_ws();
    }
    if (pos_ != s_.size()) {
      error(pos_, "unexpected trailing input after term list");
      return std::nullopt;
    }
    return out;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::optional<Term> parse_term() {
    auto lhs = parse_simple();
    if (!lhs) return std::nullopt;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ',') {
      ++pos_;
      std::size_t at = pos_;
      auto rhs = parse_term();  // right associativity
      if (!rhs) return std::nullopt;
      if (lhs->is_empty() || rhs->is_empty()) {
        error(at, "the empty term '.' cannot occur inside a pair");
        return std::nullopt;
      }
      return Term::pair(*lhs, *rhs);
    }
    return lhs;
  }

  std::optional<Term> parse_simple() {
    skip_ws();
    if (pos_ >= s_.size()) {
      error(pos_, "expected a term");
      return std::nullopt;
    }
    char c = s_[pos_];
    if (c == '.') {
      ++pos_;
      return Term::empty();
    }
    if (c == '(') {
      ++pos_;
      auto inner = parse_term();
      if (!inner) return std::nullopt;
      if (!expect(')')) return std::nullopt;
      return inner;
    }
    if (c == '{') {
      std::size_t brace_at = pos_;
      ++pos_;
      auto body = parse_term();
      if (!body) return std::nullopt;
      if (!expect('}')) return std::nullopt;
      skip_ws();
      std::size_t fn_at = pos_;
      std::string fn = read_ident();
      auto func = func_from_string(fn);
      if (!func) {
        error(fn_at, fn.empty() ? "expected a function name after '}'"
                                : "unknown function name '" + fn + "'");
        return std::nullopt;
      }
      if (*func == Func::Mk) {
        error(fn_at, "function 'mk' is reserved for memory strands");
        return std::nullopt;
      }
      if (!expect('(')) return std::nullopt;
      auto key = parse_term();
      if (!key) return std::nullopt;
      if (!expect(')')) return std::nullopt;
      if (body->is_empty() || key->is_empty()) {
        error(brace_at, "the empty term '.' cannot occur inside an encryption");
        return std::nullopt;
      }
      if (!(key->is_atom() && key->atom_ref().sort == Sort::Key)) {
        diags_.push_back({Severity::Warning, line_, col(brace_at),
                          "encryption key is not a single key-sorted atom"});
      }
      return Term::enc(*body, *func, *key);
    }
    if (ident_start(c)) {
      std::size_t at = pos_;
      std::string name = read_ident();
      auto it = sorts_.find(name);
      if (it == sorts_.end()) {
        error(at, "undeclared atom '" + name + "'");
        return std::nullopt;
      }
      return Term::atom(name, it->second);
    }
    error(pos_, std::string("unexpected character '") + c + "' in term");
    return std::nullopt;
  }

  std::string read_ident() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < s_.size() && ident_start(s_[pos_])) {
      ++pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      while (pos_ < s_.size() && s_[pos_] == '\'') ++pos_;  // primed copies from renaming
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  bool expect(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    error(pos_, std::string("expected '") + c + "'");
    return false;
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  std::size_t col(std::size_t p) const { return col_base_ + p; }

  void error(std::size_t p, std::string msg) {
    diags_.push_back({Severity::Error, line_, col(p), std::move(msg)});
  }

  std::string_view s_;
  std::size_t pos_{0};
  std::size_t line_;
  std::size_t col_base_;
  const std::map<std::string, Sort>& sorts_;
  std::vector<Diagnostic>& diags_;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace detail

/// Parses a term against an explicit sort context. Used by tests and by the
/// protocol parser itself.
inline std::optional<Term> parse_term(std::string_view text,
                                      const std::map<std::string, Sort>& sorts,
                                      std::vector<Diagnostic>* diags = nullptr) {
  std::vector<Diagnostic> local;
  detail::TermParser tp(text, 1, 1, sorts, diags ? *diags : local);
  return tp.parse_full();
}

inline SpecDocument parse_spec(std::string_view text) {
  SpecDocument doc;
  doc.text = std::string(text);
  auto& diags = doc.result.diagnostics;

  Protocol proto;
  std::map<std::string, Sort> sorts;
  std::map<std::string, std::size_t> decl_line;
  bool saw_protocol = false;

  auto error = [&](std::size_t line, std::size_t col, std::string msg) {
    diags.push_back({Severity::Error, line, col, std::move(msg)});
  };

  auto declare = [&](const std::string& name, Sort sort, std::size_t line, std::size_t col) {
    if (name.rfind("_mem_", 0) == 0) {
      error(line, col, "names prefixed '_mem_' are reserved for generated memory keys");
      return;
    }
    if (sorts.count(name)) {
      auto prev = decl_line[name];
      error(line, col, "duplicate declaration of '" + name + "' (first declared on line " +
                           std::to_string(prev) + ")");
      return;
    }
    sorts[name] = sort;
    decl_line[name] = line;
    Atom a{name, sort};
    switch (sort) {
      case Sort::Role: proto.roles.push_back(a); break;
      case Sort::Nonce: proto.nonces.push_back(a); break;
      case Sort::Key: proto.keys.push_back(a); break;
    }
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                         : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    std::size_t col0 = static_cast<std::size_t>(line.data() - raw.data()) + 1;
    auto col_of = [&](std::string_view piece) {
      return static_cast<std::size_t>(piece.data() - raw.data()) + 1;
    };

    auto split_ident = [&](std::string_view s) {
      std::size_t i = 0;
      while (i < s.size() && (detail::ident_char(s[i]) || s[i] == '\'')) ++i;
      return std::pair{s.substr(0, i), detail::trim(s.substr(i))};
    };

    // Message line: "<number>. Sender -> Receiver : <term>"
    if (std::isdigit(static_cast<unsigned char>(line[0]))) {
      std::size_t i = 0;
      while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t number = 0;
      if (i <= 9) number = std::stoull(std::string(line.substr(0, i)));
      if (i >= line.size() || line[i] != '.') {
        error(line_no, col0 + i, "expected '.' after message number");
        continue;
      }
      std::string_view rest = detail::trim(line.substr(i + 1));
      auto [sender_name, after_sender] = split_ident(rest);
      if (sender_name.empty() || after_sender.rfind("->", 0) != 0) {
        error(line_no, col0, "expected 'Sender -> Receiver : term'");
        continue;
      }
      auto [recv_name, after_recv] = split_ident(detail::trim(after_sender.substr(2)));
      if (recv_name.empty() || after_recv.empty() || after_recv[0] != ':') {
        error(line_no, col0, "expected ':' after receiver");
        continue;
      }
      std::string_view term_text = detail::trim(after_recv.substr(1));

      if (number != proto.messages.size() + 1) {
        error(line_no, col0, "message number " + std::to_string(number) +
                                 " out of order; expected " +
                                 std::to_string(proto.messages.size() + 1));
      }
      auto lookup_role = [&](std::string_view nm) -> std::optional<Atom> {
        auto it = sorts.find(std::string(nm));
        if (it == sorts.end()) {
          error(line_no, col0, "undeclared atom '" + std::string(nm) + "'");
          return std::nullopt;
        }
        if (it->second != Sort::Role) {
          error(line_no, col0, "'" + std::string(nm) + "' is not a role");
          return std::nullopt;
        }
        return Atom{std::string(nm), Sort::Role};
      };
      auto sender = lookup_role(sender_name);
      auto receiver = lookup_role(recv_name);
      if (sender && receiver && *sender == *receiver)
        error(line_no, col0, "sender and receiver must differ");

      detail::TermParser tp(term_text, line_no, col_of(term_text), sorts, diags);
      auto payload = tp.parse_full();
      if (sender && receiver && payload) {
        proto.messages.push_back({*sender, *receiver, *payload});
        doc.message_lines.push_back(line_no);
      }
      continue;
    }

    auto [keyword, rest] = split_ident(line);
    if (keyword == "protocol") {
      if (saw_protocol) {
        error(line_no, col0, "duplicate 'protocol' header");
        continue;
      }
      saw_protocol = true;
      if (rest.empty() || !detail::ident_start(rest[0])) {
        error(line_no, col0, "expected a protocol name");
        continue;
      }
      proto.name = std::string(rest);
      continue;
    }
    if (keyword == "roles" || keyword == "nonces" || keyword == "keys") {
      Sort sort = keyword == "roles" ? Sort::Role : keyword == "nonces" ? Sort::Nonce : Sort::Key;
      std::string_view items = rest;
      if (items.empty()) {
        error(line_no, col0, "expected at least one name after '" + std::string(keyword) + "'");
        continue;
      }
      while (true) {
        auto [nm, after] = split_ident(detail::trim(items));
        if (nm.empty()) {
          error(line_no, col0, "expected a name");
          break;
        }
        declare(std::string(nm), sort, line_no, col0);
        if (after.empty()) break;
        if (after[0] != ',') {
          error(line_no, col0, "expected ',' between names");
          break;
        }
        items = after.substr(1);
      }
      continue;
    }
    if (keyword == "keypair") {
      auto [first, after_first] = split_ident(rest);
      if (first.empty() || after_first.empty() || after_first[0] != ',') {
        error(line_no, col0, "expected 'keypair Pub, Priv'");
        continue;
      }
      auto [second, tail] = split_ident(detail::trim(after_first.substr(1)));
      if (second.empty() || !tail.empty()) {
        error(line_no, col0, "expected 'keypair Pub, Priv'");
        continue;
      }
      declare(std::string(first), Sort::Key, line_no, col0);
      declare(std::string(second), Sort::Key, line_no, col0);
      proto.keypairs.emplace_back(Atom{std::string(first), Sort::Key},
                                  Atom{std::string(second), Sort::Key});
      continue;
    }
    if (keyword == "knows") {
      auto [role_name, after_role] = split_ident(rest);
      if (role_name.empty() || after_role.empty() || after_role[0] != ':') {
        error(line_no, col0, "expected 'knows Role: term, ...'");
        continue;
      }
      auto it = sorts.find(std::string(role_name));
      if (it == sorts.end() || it->second != Sort::Role) {
        error(line_no, col0, "'" + std::string(role_name) + "' is not a declared role");
        continue;
      }
      Atom role{std::string(role_name), Sort::Role};
      if (proto.knowledge.count(role)) {
        error(line_no, col0, "duplicate 'knows' line for role '" + role.name + "'");
        continue;
      }
      std::string_view items = detail::trim(after_role.substr(1));
      detail::TermParser tp(items, line_no, col_of(items), sorts, diags);
      auto terms = tp.parse_list();
      if (terms) proto.knowledge[role] = *terms;
      continue;
    }
    if (keyword == "secrets") {
      if (rest.empty() || rest[0] != ':') {
        error(line_no, col0, "expected 'secrets: term, ...'");
        continue;
      }
      std::string_view items = detail::trim(rest.substr(1));
      detail::TermParser tp(items, line_no, col_of(items), sorts, diags);
      auto terms = tp.parse_list();
      if (terms) proto.secrets = *terms;
      continue;
    }
    error(line_no, col0, "unrecognized line");
  }

  if (!saw_protocol) error(1, 1, "missing 'protocol' header");

  // Declared secrets must actually occur somewhere in the protocol.
  for (const auto& s : proto.secrets) {
    bool occurs = false;
    for (const auto& m : proto.messages)
      if (subterm(s, m.payload)) occurs = true;
    for (const auto& [role, terms] : proto.knowledge)
      for (const auto& t : terms)
        if (subterm(s, t)) occurs = true;
    if (!occurs)
      diags.push_back({Severity::Error, 0, 0,
                       "secret '" + s.str() + "' occurs in no message payload or knowledge"});
  }

  bool has_error = std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Severity::Error;
  });
  if (!has_error) doc.result.protocol = std::move(proto);
  return doc;
}

inline ParseResult parse_protocol(std::string_view text) { return parse_spec(text).result; }

namespace detail {

/// Knowledge and secret list elements parenthesize top-level pairs so the
/// list separator stays unambiguous.
inline std::string list_element(const Term& t) {
  return t.is_pair() ? "(" + t.str() + ")" : t.str();
}

inline void append_list(std::ostringstream& os, const std::vector<Term>& terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) os << ", ";
    os << list_element(terms[i]);
  }
}

}  // namespace detail

/// Canonical textual form; parse(serialize(p)) reproduces p exactly.
inline std::string serialize_protocol(const Protocol& p) {
  std::ostringstream os;
  os << "protocol " << p.name << "\n";
  auto names = [](const std::vector<Atom>& atoms) {
    std::string out;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (i) out += ", ";
      out += atoms[i].name;
    }
    return out;
  };
  if (!p.roles.empty()) os << "roles " << names(p.roles) << "\n";
  if (!p.nonces.empty()) os << "nonces " << names(p.nonces) << "\n";
  // Keys declared through 'keypair' lines are serialized as such, not twice.
  std::vector<Atom> plain_keys;
  for (const auto& k : p.keys) {
    bool in_pair = false;
    for (const auto& [pub, priv] : p.keypairs)
      if (k == pub || k == priv) in_pair = true;
    if (!in_pair) plain_keys.push_back(k);
  }
  if (!plain_keys.empty()) os << "keys " << names(plain_keys) << "\n";
  for (const auto& [pub, priv] : p.keypairs)
    os << "keypair " << pub.name << ", " << priv.name << "\n";
  for (const auto& role : p.roles) {
    auto it = p.knowledge.find(role);
    if (it == p.knowledge.end() || it->second.empty()) continue;
    os << "knows " << role.name << ": ";
    detail::append_list(os, it->second);
    os << "\n";
  }
  if (!p.secrets.empty()) {
    os << "secrets: ";
    detail::append_list(os, p.secrets);
    os << "\n";
  }
  os << "\n";
  for (std::size_t i = 0; i < p.messages.size(); ++i) {
    const auto& m = p.messages[i];
    os << (i + 1) << ". " << m.sender.name << " -> " << m.receiver.name << " : "
       << m.payload.str() << "\n";
  }
  return os.str();
}

}  // namespace spc
