#pragma once

// Symbolic message terms: atoms, pairs and symbolic encryptions, plus the
// structural operations the rest of the toolkit is built on (sub-term
// relation, renaming, canonical abstraction). Terms are immutable trees
// behind shared nodes; all operations here are pure.

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace spc {

enum class Sort { Role, Nonce, Key };

inline std::string_view to_string(Sort s) {
  switch (s) {
    case Sort::Role: return "role";
    case Sort::Nonce: return "nonce";
    case Sort::Key: return "key";
  }
  return "?";
}

/// Single-letter abstraction symbol used by canonical forms.
inline char sort_symbol(Sort s) {
  switch (s) {
    case Sort::Role: return 'r';
    case Sort::Nonce: return 'n';
    case Sort::Key: return 'k';
  }
  return '?';
}

enum class Func { Sk, Pk, Pvk, H, Mk };

inline std::string_view to_string(Func f) {
  switch (f) {
    case Func::Sk: return "sk";
    case Func::Pk: return "pk";
    case Func::Pvk: return "pvk";
    case Func::H: return "h";
    case Func::Mk: return "mk";
  }
  return "?";
}

inline std::optional<Func> func_from_string(std::string_view s) {
  if (s == "sk") return Func::Sk;
  if (s == "pk") return Func::Pk;
  if (s == "pvk") return Func::Pvk;
  if (s == "h") return Func::H;
  if (s == "mk") return Func::Mk;
  return std::nullopt;
}

/// A named, sorted basic value. Equality and ordering are by (name, sort).
struct Atom {
  std::string name;
  Sort sort{Sort::Nonce};

  friend bool operator==(const Atom&, const Atom&) = default;
  friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// Immutable term tree. The empty term is written '.', pairing is binary
/// and right-associated in the surface syntax, encryption carries a
/// function name and a key term.
class Term {
 public:
  enum class Kind : std::uint8_t { Empty, Atom, Pair, Enc };

  Term() : n_(empty_node()) {}

  static Term empty() { return Term(); }

  static Term atom(Atom a) {
    if (a.name.empty()) throw std::invalid_argument("atom name must be non-empty");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Atom;
    n->atom = std::move(a);
    finish(*n);
    return Term(std::move(n));
  }

  static Term atom(std::string name, Sort sort) {
    return atom(Atom{std::move(name), sort});
  }

  static Term pair(const Term& lhs, const Term& rhs) {
    if (lhs.is_empty() || rhs.is_empty())
      throw std::invalid_argument("empty term cannot occur inside a pair");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Pair;
    n->a = lhs.n_;
    n->b = rhs.n_;
    finish(*n);
    return Term(std::move(n));
  }

  static Term enc(const Term& body, Func f, const Term& key) {
    if (body.is_empty() || key.is_empty())
      throw std::invalid_argument("empty term cannot occur inside an encryption");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Enc;
    n->func = f;
    n->a = body.n_;
    n->b = key.n_;
    finish(*n);
    return Term(std::move(n));
  }

  Kind kind() const { return n_->kind; }
  bool is_empty() const { return n_->kind == Kind::Empty; }
  bool is_atom() const { return n_->kind == Kind::Atom; }
  bool is_pair() const { return n_->kind == Kind::Pair; }
  bool is_enc() const { return n_->kind == Kind::Enc; }

  const Atom& atom_ref() const {
    require(Kind::Atom);
    return n_->atom;
  }
  Term left() const {
    require(Kind::Pair);
    return Term(n_->a);
  }
  Term right() const {
    require(Kind::Pair);
    return Term(n_->b);
  }
  Term body() const {
    require(Kind::Enc);
    return Term(n_->a);
  }
  Term key() const {
    require(Kind::Enc);
    return Term(n_->b);
  }
  Func func() const {
    require(Kind::Enc);
    return n_->func;
  }

  /// Number of tree nodes.
  std::size_t size() const { return n_->size; }
  /// Height of the tree; atoms and '.' have depth 1.
  std::size_t depth() const { return n_->depth; }
  std::size_t hash() const { return n_->hash; }

  friend bool operator==(const Term& x, const Term& y) {
    if (x.n_ == y.n_) return true;
    if (x.n_->hash != y.n_->hash || x.n_->size != y.n_->size) return false;
    return eq(*x.n_, *y.n_);
  }

  friend std::strong_ordering operator<=>(const Term& x, const Term& y) {
    if (x.n_ == y.n_) return std::strong_ordering::equal;
    return cmp(*x.n_, *y.n_);
  }

  /// Surface syntax. Pairs print right-associated, so a left-nested pair
  /// gets explicit parentheses and round-trips through the grammar.
  std::string str() const {
    std::string out;
    print(*n_, out, false);
    return out;
  }

 private:
  struct Node {
    Kind kind{Kind::Empty};
    Atom atom;
    Func func{Func::Sk};
    std::shared_ptr<const Node> a, b;
    std::size_t hash{0};
    std::uint32_t size{1};
    std::uint32_t depth{1};
  };

  explicit Term(std::shared_ptr<const Node> n) : n_(std::move(n)) {}

  static const std::shared_ptr<const Node>& empty_node() {
    static const std::shared_ptr<const Node> node = [] {
      auto n = std::make_shared<Node>();
      finish(*n);
      return n;
    }();
    return node;
  }

  void require(Kind k) const {
    if (n_->kind != k) throw std::logic_error("term accessor used on wrong constructor");
  }

  static void finish(Node& n) {
    std::size_t h = static_cast<std::size_t>(n.kind) * 0x9e3779b97f4a7c15ull;
    std::uint32_t size = 1, depth = 1;
    if (n.kind == Kind::Atom) {
      h ^= std::hash<std::string>{}(n.atom.name) + 0x9e3779b9u + (h << 6) + (h >> 2);
      h ^= static_cast<std::size_t>(n.atom.sort) + (h << 3);
    }
    if (n.a) {
      h ^= n.a->hash + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      size += n.a->size;
      depth = std::max(depth, n.a->depth + 1);
    }
    if (n.b) {
      h ^= n.b->hash + 0xc2b2ae3d27d4eb4full + (h << 5) + (h >> 3);
      size += n.b->size;
      depth = std::max(depth, n.b->depth + 1);
    }
    if (n.kind == Kind::Enc) h ^= static_cast<std::size_t>(n.func) << 17;
    n.hash = h;
    n.size = size;
    n.depth = depth;
  }

  static bool eq(const Node& x, const Node& y) {
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case Kind::Empty: return true;
      case Kind::Atom: return x.atom == y.atom;
      case Kind::Pair: return eq(*x.a, *y.a) && eq(*x.b, *y.b);
      case Kind::Enc: return x.func == y.func && eq(*x.a, *y.a) && eq(*x.b, *y.b);
    }
    return false;
  }

  static std::strong_ordering cmp(const Node& x, const Node& y) {
    if (auto c = x.kind <=> y.kind; c != 0) return c;
    switch (x.kind) {
      case Kind::Empty: return std::strong_ordering::equal;
      case Kind::Atom: return x.atom <=> y.atom;
      case Kind::Pair: {
        if (auto c = cmp(*x.a, *y.a); c != 0) return c;
        return cmp(*x.b, *y.b);
      }
      case Kind::Enc: {
        if (auto c = x.func <=> y.func; c != 0) return c;
        if (auto c = cmp(*x.a, *y.a); c != 0) return c;
        return cmp(*x.b, *y.b);
      }
    }
    return std::strong_ordering::equal;
  }

  static void print(const Node& n, std::string& out, bool parenthesize_pair) {
    switch (n.kind) {
      case Kind::Empty:
        out += '.';
        return;
      case Kind::Atom:
        out += n.atom.name;
        return;
      case Kind::Pair:
        if (parenthesize_pair) out += '(';
        print(*n.a, out, true);  // left child of a pair needs parens if itself a pair
        out += ", ";
        print(*n.b, out, false);
        if (parenthesize_pair) out += ')';
        return;
      case Kind::Enc:
        out += '{';
        print(*n.a, out, false);
        out += '}';
        out += to_string(n.func);
        out += '(';
        print(*n.b, out, false);
        out += ')';
        return;
    }
  }

  std::shared_ptr<const Node> n_;

  friend struct TermWalk;
};

/// Sub-term relation: reflexive, descends into both pair components and
/// into both the body and the key of an encryption.
inline bool subterm(const Term& t1, const Term& t2) {
  if (t1 == t2) return true;
  switch (t2.kind()) {
    case Term::Kind::Pair:
      return subterm(t1, t2.left()) || subterm(t1, t2.right());
    case Term::Kind::Enc:
      return subterm(t1, t2.body()) || subterm(t1, t2.key());
    default:
      return false;
  }
}

inline bool is_encrypted(const Term& t) { return t.is_enc(); }

/// All atoms occurring anywhere in t, key positions included.
inline void collect_atoms(const Term& t, std::set<Atom>& out) {
  switch (t.kind()) {
    case Term::Kind::Atom:
      out.insert(t.atom_ref());
      return;
    case Term::Kind::Pair:
      collect_atoms(t.left(), out);
      collect_atoms(t.right(), out);
      return;
    case Term::Kind::Enc:
      collect_atoms(t.body(), out);
      collect_atoms(t.key(), out);
      return;
    default:
      return;
  }
}

inline std::set<Atom> atoms_of(const Term& t) {
  std::set<Atom> out;
  collect_atoms(t, out);
  return out;
}

/// Every distinct subtree of t, t itself included.
inline void collect_subterms(const Term& t, std::set<Term>& out) {
  if (!out.insert(t).second) return;
  switch (t.kind()) {
    case Term::Kind::Pair:
      collect_subterms(t.left(), out);
      collect_subterms(t.right(), out);
      return;
    case Term::Kind::Enc:
      collect_subterms(t.body(), out);
      collect_subterms(t.key(), out);
      return;
    default:
      return;
  }
}

inline std::set<Term> subterms_of(const Term& t) {
  std::set<Term> out;
  collect_subterms(t, out);
  return out;
}

/// Replaces every occurrence of atom `old` by `fresh`; the sorts must match.
inline Term rename_atom(const Term& t, const Atom& old, const Atom& fresh) {
  if (old.sort != fresh.sort)
    throw std::invalid_argument("rename_atom: sort mismatch between " + old.name + " and " +
                                fresh.name);
  switch (t.kind()) {
    case Term::Kind::Empty:
      return t;
    case Term::Kind::Atom:
      return t.atom_ref() == old ? Term::atom(fresh) : t;
    case Term::Kind::Pair: {
      Term l = rename_atom(t.left(), old, fresh);
      Term r = rename_atom(t.right(), old, fresh);
      if (l == t.left() && r == t.right()) return t;
      return Term::pair(l, r);
    }
    case Term::Kind::Enc: {
      Term b = rename_atom(t.body(), old, fresh);
      Term k = rename_atom(t.key(), old, fresh);
      if (b == t.body() && k == t.key()) return t;
      return Term::enc(b, t.func(), k);
    }
  }
  return t;
}

/// Replaces every occurrence of the subtree `from` by `to`.
inline Term substitute(const Term& t, const Term& from, const Term& to) {
  if (from.is_empty()) throw std::invalid_argument("substitute: pattern must be non-empty");
  if (t == from) return to;
  switch (t.kind()) {
    case Term::Kind::Pair: {
      Term l = substitute(t.left(), from, to);
      Term r = substitute(t.right(), from, to);
      if (l == t.left() && r == t.right()) return t;
      return Term::pair(l, r);
    }
    case Term::Kind::Enc: {
      Term b = substitute(t.body(), from, to);
      Term k = substitute(t.key(), from, to);
      if (b == t.body() && k == t.key()) return t;
      return Term::enc(b, t.func(), k);
    }
    default:
      return t;
  }
}

/// A term with every concrete atom collapsed to its sort symbol. Used by
/// the structural independence check, where only shape matters.
struct SortSignature {
  Term term;

  friend bool operator==(const SortSignature&, const SortSignature&) = default;
  friend auto operator<=>(const SortSignature&, const SortSignature&) = default;

  std::string str() const { return term.str(); }
};

inline Term abstract_atoms(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Empty:
      return t;
    case Term::Kind::Atom:
      return Term::atom(std::string(1, sort_symbol(t.atom_ref().sort)), t.atom_ref().sort);
    case Term::Kind::Pair:
      return Term::pair(abstract_atoms(t.left()), abstract_atoms(t.right()));
    case Term::Kind::Enc:
      return Term::enc(abstract_atoms(t.body()), t.func(), abstract_atoms(t.key()));
  }
  return t;
}

inline SortSignature canonicalize(const Term& t) { return SortSignature{abstract_atoms(t)}; }

}  // namespace spc
