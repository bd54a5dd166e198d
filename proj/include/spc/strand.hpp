#pragma once

// Knowledge strands: each protocol participant becomes a strand carrying an
// initial knowledge set, a classifier and a signed-term trace. A protocol's
// message list maps onto one strand per role plus one cross edge per message.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "spc/term.hpp"

namespace spc {

enum class Sign : std::uint8_t { Plus, Minus };

inline char sign_char(Sign s) { return s == Sign::Plus ? '+' : '-'; }

struct SignedTerm {
  Sign sign{Sign::Plus};
  Term payload;

  friend bool operator==(const SignedTerm&, const SignedTerm&) = default;
  friend auto operator<=>(const SignedTerm&, const SignedTerm&) = default;
};

/// C_R marks a participant strand, C_M the memory strand attached to it.
enum class Classifier : std::uint8_t { Participant, Memory };

inline std::string_view to_string(Classifier c) {
  return c == Classifier::Participant ? "C_R" : "C_M";
}

struct KStrand {
  std::vector<Term> knowledge;
  Classifier classifier{Classifier::Participant};
  Atom participant;
  std::vector<SignedTerm> trace;

  friend bool operator==(const KStrand&, const KStrand&) = default;
};

/// Position of a node: strand index into the owning space, 1-based trace index.
struct NodeRef {
  std::size_t strand{0};
  std::size_t index{1};

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
  friend auto operator<=>(const NodeRef&, const NodeRef&) = default;
};

/// Cross-strand edge from a transmission to the matching reception.
struct CrossEdge {
  NodeRef from;
  NodeRef to;

  friend bool operator==(const CrossEdge&, const CrossEdge&) = default;
  friend auto operator<=>(const CrossEdge&, const CrossEdge&) = default;
};

struct KStrandSpace {
  std::vector<KStrand> strands;
  std::vector<CrossEdge> cross_edges;  // in message order for spaces built from protocols
};

struct Message {
  Atom sender;
  Atom receiver;
  Term payload;

  friend bool operator==(const Message&, const Message&) = default;
};

/// The parseable surface form of a protocol: declarations, per-role initial
/// knowledge, declared secrets and an ordered message list.
struct Protocol {
  std::string name;
  std::vector<Atom> roles;
  std::vector<Atom> nonces;
  std::vector<Atom> keys;
  std::vector<std::pair<Atom, Atom>> keypairs;  // public/private inverse pairs
  std::map<Atom, std::vector<Term>> knowledge;
  std::vector<Term> secrets;
  std::vector<Message> messages;

  friend bool operator==(const Protocol&, const Protocol&) = default;

  std::optional<Atom> find_atom(std::string_view name) const {
    for (const auto& a : roles)
      if (a.name == name) return a;
    for (const auto& a : nonces)
      if (a.name == name) return a;
    for (const auto& a : keys)
      if (a.name == name) return a;
    return std::nullopt;
  }

  std::vector<Atom> declared_atoms() const {
    std::vector<Atom> out;
    out.insert(out.end(), roles.begin(), roles.end());
    out.insert(out.end(), nonces.begin(), nonces.end());
    out.insert(out.end(), keys.begin(), keys.end());
    return out;
  }
};

inline const Term& node_term(const KStrandSpace& space, NodeRef n) {
  if (n.strand >= space.strands.size())
    throw std::out_of_range("node_term: strand index out of range");
  const auto& trace = space.strands[n.strand].trace;
  if (n.index < 1 || n.index > trace.size())
    throw std::out_of_range("node_term: trace index out of range");
  return trace[n.index - 1].payload;
}

inline Sign node_sign(const KStrandSpace& space, NodeRef n) {
  if (n.strand >= space.strands.size())
    throw std::out_of_range("node_sign: strand index out of range");
  const auto& trace = space.strands[n.strand].trace;
  if (n.index < 1 || n.index > trace.size())
    throw std::out_of_range("node_sign: trace index out of range");
  return trace[n.index - 1].sign;
}

/// One participant strand per declared role, in declaration order. Message i
/// contributes a positive node on the sender strand, a negative node on the
/// receiver strand and the cross edge between them.
inline KStrandSpace to_strand_space(const Protocol& p) {
  KStrandSpace space;
  std::map<Atom, std::size_t> strand_of;
  for (const auto& role : p.roles) {
    KStrand s;
    s.classifier = Classifier::Participant;
    s.participant = role;
    if (auto it = p.knowledge.find(role); it != p.knowledge.end()) s.knowledge = it->second;
    strand_of[role] = space.strands.size();
    space.strands.push_back(std::move(s));
  }
  for (const auto& m : p.messages) {
    auto si = strand_of.at(m.sender);
    auto ri = strand_of.at(m.receiver);
    space.strands[si].trace.push_back({Sign::Plus, m.payload});
    space.strands[ri].trace.push_back({Sign::Minus, m.payload});
    space.cross_edges.push_back({NodeRef{si, space.strands[si].trace.size()},
                                 NodeRef{ri, space.strands[ri].trace.size()}});
  }
  return space;
}

/// Union of payloads over all positive nodes, always including the empty term.
inline std::set<Term> sent_terms(const KStrandSpace& space) {
  std::set<Term> out;
  out.insert(Term::empty());
  for (const auto& s : space.strands)
    for (const auto& st : s.trace)
      if (st.sign == Sign::Plus) out.insert(st.payload);
  return out;
}

/// Checks the well-formedness rules a space must satisfy; violations come
/// back as data so callers can report them all at once.
inline std::vector<std::string> validate_space(const KStrandSpace& space) {
  std::vector<std::string> violations;
  auto in_range = [&](NodeRef n) {
    return n.strand < space.strands.size() && n.index >= 1 &&
           n.index <= space.strands[n.strand].trace.size();
  };
  for (const auto& e : space.cross_edges) {
    if (!in_range(e.from) || !in_range(e.to)) {
      violations.push_back("cross edge references a node outside the space");
      continue;
    }
    if (e.from.strand == e.to.strand)
      violations.push_back("cross edge connects two nodes on the same strand");
    if (node_sign(space, e.from) != Sign::Plus || node_sign(space, e.to) != Sign::Minus)
      violations.push_back("cross edge must run from a positive node to a negative node");
    if (!(node_term(space, e.from) == node_term(space, e.to)))
      violations.push_back("cross edge endpoints carry different payloads");
  }
  return violations;
}

/// Recovers the message list of a space built by to_strand_space, using the
/// cross edges in order.
inline std::vector<Message> messages_of_space(const KStrandSpace& space) {
  std::vector<Message> out;
  for (const auto& e : space.cross_edges) {
    out.push_back({space.strands[e.from.strand].participant,
                   space.strands[e.to.strand].participant, node_term(space, e.from)});
  }
  return out;
}

}  // namespace spc
