#pragma once

// Composability pre-checks run before two protocols are combined. The
// secrecy check looks for one protocol's secrets travelling unprotected in
// the other protocol's messages; the structural check looks for ciphertexts
// under the same key whose abstracted shapes coincide, which participants
// could not tell apart. rename_conflicts freshens clashing names so the
// secrecy check passes afterwards.

#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "spc/strand.hpp"
#include "spc/term.hpp"

namespace spc {

struct SecrecyViolation {
  Term secret;
  Term offending_term;      // sent payload in which the secret is exposed
  NodeRef location;         // transmitting node in the offending protocol's space
  std::string owning_protocol;  // protocol whose message exposes the secret

  friend bool operator==(const SecrecyViolation&, const SecrecyViolation&) = default;
  friend auto operator<=>(const SecrecyViolation&, const SecrecyViolation&) = default;
};

struct StructuralClash {
  SortSignature signature;      // shared canonical shape of the two ciphertexts
  SortSignature key_signature;  // canonical shape of the shared key
  Term term1, term2;            // the concrete ciphertexts
  NodeRef location1, location2;

  friend bool operator==(const StructuralClash&, const StructuralClash&) = default;
  friend auto operator<=>(const StructuralClash&, const StructuralClash&) = default;
};

/// Key atoms present in some role's declared initial knowledge. Anything
/// else used as a key (a session key distributed at run time, a structured
/// term) counts as insecure.
inline std::set<Atom> long_term_keys(const Protocol& p) {
  std::set<Atom> out;
  for (const auto& [role, terms] : p.knowledge)
    for (const auto& t : terms)
      for (const auto& a : atoms_of(t))
        if (a.sort == Sort::Key) out.insert(a);
  return out;
}

namespace detail {

inline bool long_term(const Term& key, const std::set<Atom>& ltk) {
  return key.is_atom() && key.atom_ref().sort == Sort::Key && ltk.count(key.atom_ref());
}

/// True if some occurrence of `secret` in `t` is reachable without passing
/// through an encryption under a long-term key. Key positions are never
/// exposed by a transmission, so occurrences there do not count.
inline bool exposed_occurrence(const Term& secret, const Term& t, const std::set<Atom>& ltk,
                               bool under_long_term) {
  if (t == secret) return !under_long_term;
  switch (t.kind()) {
    case Term::Kind::Pair:
      return exposed_occurrence(secret, t.left(), ltk, under_long_term) ||
             exposed_occurrence(secret, t.right(), ltk, under_long_term);
    case Term::Kind::Enc:
      return exposed_occurrence(secret, t.body(), ltk,
                                under_long_term || long_term(t.key(), ltk));
    default:
      return false;
  }
}

/// Positive node transmitting message `index` (0-based) of the protocol.
inline NodeRef sender_node(const KStrandSpace& space, std::size_t index) {
  return space.cross_edges.at(index).from;
}

inline void check_one_direction(const Protocol& owner_of_secrets, const Protocol& other,
                                std::vector<SecrecyViolation>& out) {
  auto space = to_strand_space(other);
  auto ltk = long_term_keys(other);
  for (const auto& secret : owner_of_secrets.secrets) {
    for (std::size_t mi = 0; mi < other.messages.size(); ++mi) {
      const Term& payload = other.messages[mi].payload;
      if (!subterm(secret, payload)) continue;
      if (exposed_occurrence(secret, payload, ltk, false))
        out.push_back({secret, payload, sender_node(space, mi), other.name});
    }
  }
}

}  // namespace detail

/// Secrets of each protocol checked against the sent terms of the other.
inline std::vector<SecrecyViolation> check_secrecy_independence(const Protocol& p1,
                                                                const Protocol& p2) {
  std::vector<SecrecyViolation> out;
  detail::check_one_direction(p1, p2, out);
  detail::check_one_direction(p2, p1, out);
  return out;
}

struct RenameReport {
  std::vector<std::pair<Atom, Atom>> renamed;  // old -> fresh, applied to the second protocol

  bool empty() const { return renamed.empty(); }
};

inline Protocol rename_protocol_atom(Protocol p, const Atom& old, const Atom& fresh) {
  auto fix = [&](std::vector<Atom>& v) {
    for (auto& a : v)
      if (a == old) a = fresh;
  };
  fix(p.nonces);
  fix(p.keys);
  for (auto& [pub, priv] : p.keypairs) {
    if (pub == old) pub = fresh;
    if (priv == old) priv = fresh;
  }
  for (auto& [role, terms] : p.knowledge)
    for (auto& t : terms) t = rename_atom(t, old, fresh);
  for (auto& s : p.secrets) s = rename_atom(s, old, fresh);
  for (auto& m : p.messages) m.payload = rename_atom(m.payload, old, fresh);
  return p;
}

/// Freshens, in the second protocol, every shared non-role atom involved in
/// a secrecy violation. Fresh names take primes until unused on both sides.
inline std::tuple<Protocol, Protocol, RenameReport> rename_conflicts(const Protocol& p1,
                                                                     const Protocol& p2) {
  RenameReport report;
  Protocol out2 = p2;

  auto declared = [](const Protocol& p, const std::string& name) {
    return p.find_atom(name).has_value();
  };

  std::set<Atom> to_rename;
  for (const auto& v : check_secrecy_independence(p1, p2)) {
    for (const auto& a : atoms_of(v.secret)) {
      if (a.sort == Sort::Role) continue;  // participant names stay shared
      if (declared(p1, a.name) && declared(p2, a.name)) to_rename.insert(a);
    }
  }
  for (const auto& old : to_rename) {
    std::string fresh_name = old.name + "'";
    while (declared(p1, fresh_name) || declared(out2, fresh_name)) fresh_name += "'";
    Atom fresh{fresh_name, old.sort};
    out2 = rename_protocol_atom(std::move(out2), old, fresh);
    report.renamed.emplace_back(old, fresh);
  }
  return {p1, std::move(out2), std::move(report)};
}

namespace detail {

struct EncOccurrence {
  Term term;
  NodeRef location;  // transmitting node of the first message containing it
};

inline std::vector<EncOccurrence> sent_encryptions(const Protocol& p) {
  auto space = to_strand_space(p);
  std::vector<EncOccurrence> out;
  std::set<Term> seen;
  for (std::size_t mi = 0; mi < p.messages.size(); ++mi) {
    for (const auto& t : subterms_of(p.messages[mi].payload)) {
      if (!t.is_enc() || !seen.insert(t).second) continue;
      out.push_back({t, sender_node(space, mi)});
    }
  }
  return out;
}

}  // namespace detail

/// Two ciphertexts clash when they use the same function and the same key
/// and their bodies abstract to the same shape. Encryptions under different
/// keys are always distinguishable, whatever their shape.
inline std::vector<StructuralClash> check_structural_independence(const Protocol& p1,
                                                                  const Protocol& p2) {
  std::vector<StructuralClash> out;
  auto encs1 = detail::sent_encryptions(p1);
  auto encs2 = detail::sent_encryptions(p2);
  for (const auto& e1 : encs1) {
    for (const auto& e2 : encs2) {
      if (e1.term.func() != e2.term.func()) continue;
      if (!(e1.term.key() == e2.term.key())) continue;
      if (!(canonicalize(e1.term.body()) == canonicalize(e2.term.body()))) continue;
      out.push_back({canonicalize(e1.term), canonicalize(e1.term.key()), e1.term, e2.term,
                     e1.location, e2.location});
    }
  }
  return out;
}

/// Same check inside a single protocol, for composed results: two distinct
/// ciphertexts under one key must stay structurally distinguishable.
inline std::vector<StructuralClash> structural_clashes_within(const Protocol& p) {
  std::vector<StructuralClash> out;
  auto encs = detail::sent_encryptions(p);
  for (std::size_t i = 0; i < encs.size(); ++i) {
    for (std::size_t j = i + 1; j < encs.size(); ++j) {
      const auto& a = encs[i];
      const auto& b = encs[j];
      if (a.term == b.term) continue;
      if (a.term.func() != b.term.func()) continue;
      if (!(a.term.key() == b.term.key())) continue;
      if (!(canonicalize(a.term.body()) == canonicalize(b.term.body()))) continue;
      out.push_back({canonicalize(a.term), canonicalize(a.term.key()), a.term, b.term, a.location,
                     b.location});
    }
  }
  return out;
}

}  // namespace spc
