#pragma once

// Term connections: the representation of security properties. A partial
// connection links a free term to an encrypted term containing it; a
// complete connection links two encrypted terms where the first (or its
// body) sits inside the second. Connections anchor to the transmissions in
// which the terms travel, so both ends live at positive nodes and the first
// end's term must occur in both payloads.

#include <set>
#include <vector>

#include "spc/strand.hpp"
#include "spc/term.hpp"

namespace spc {

struct ConnectionEnd {
  NodeRef node;
  Term term;

  friend bool operator==(const ConnectionEnd&, const ConnectionEnd&) = default;
  friend auto operator<=>(const ConnectionEnd&, const ConnectionEnd&) = default;
};

inline NodeRef cnode(const ConnectionEnd& e) { return e.node; }
inline const Term& cterm(const ConnectionEnd& e) { return e.term; }
inline const KStrand& cstrand(const ConnectionEnd& e, const KStrandSpace& space) {
  return space.strands.at(e.node.strand);
}

enum class ConnectionKind : std::uint8_t { Partial, Complete };

inline std::string_view to_string(ConnectionKind k) {
  return k == ConnectionKind::Partial ? "partial" : "complete";
}

struct Connection {
  ConnectionKind kind{ConnectionKind::Partial};
  ConnectionEnd pre;
  ConnectionEnd post;

  friend bool operator==(const Connection&, const Connection&) = default;
  friend auto operator<=>(const Connection&, const Connection&) = default;
};

/// A security property is just the set of connections a space exhibits.
struct SecurityProperty {
  std::set<Connection> connections;

  friend bool operator==(const SecurityProperty&, const SecurityProperty&) = default;

  std::size_t count(ConnectionKind k) const {
    std::size_t n = 0;
    for (const auto& c : connections)
      if (c.kind == k) ++n;
    return n;
  }
};

namespace detail {

struct PositiveNode {
  NodeRef node;
  Term payload;
  std::set<Term> subterms;
};

inline std::vector<PositiveNode> positive_nodes(const KStrandSpace& space) {
  std::vector<PositiveNode> out;
  for (std::size_t si = 0; si < space.strands.size(); ++si) {
    const auto& trace = space.strands[si].trace;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      if (trace[i].sign != Sign::Plus) continue;
      PositiveNode pn;
      pn.node = NodeRef{si, i + 1};
      pn.payload = trace[i].payload;
      pn.subterms = subterms_of(trace[i].payload);
      out.push_back(std::move(pn));
    }
  }
  return out;
}

}  // namespace detail

/// Pairs (u, e) with u unencrypted, e encrypted, u inside e, anchored at two
/// distinct transmissions carrying u and e respectively. The unencrypted
/// term is always the pre-condition end.
inline std::set<Connection> partial_connections(const KStrandSpace& space) {
  std::set<Connection> out;
  auto nodes = detail::positive_nodes(space);
  for (const auto& p : nodes) {
    for (const auto& q : nodes) {
      if (p.node == q.node) continue;
      for (const auto& u : p.subterms) {
        if (u.is_enc() || u.is_empty()) continue;
        for (const auto& e : q.subterms) {
          if (!e.is_enc()) continue;
          if (!subterm(u, e)) continue;
          out.insert({ConnectionKind::Partial, {p.node, u}, {q.node, e}});
        }
      }
    }
  }
  return out;
}

/// Pairs of distinct encrypted terms (t1, t2) at distinct transmissions with
/// t1 occurring in both payloads and t1 (or its body) inside t2.
inline std::set<Connection> complete_connections(const KStrandSpace& space) {
  std::set<Connection> out;
  auto nodes = detail::positive_nodes(space);
  for (const auto& p : nodes) {
    for (const auto& q : nodes) {
      if (p.node == q.node) continue;
      for (const auto& t1 : p.subterms) {
        if (!t1.is_enc()) continue;
        if (!q.subterms.count(t1)) continue;  // t1 must occur in the post payload too
        for (const auto& t2 : q.subterms) {
          if (!t2.is_enc() || t1 == t2) continue;
          if (subterm(t1, t2) || subterm(t1.body(), t2))
            out.insert({ConnectionKind::Complete, {p.node, t1}, {q.node, t2}});
        }
      }
    }
  }
  return out;
}

inline SecurityProperty security_property(const KStrandSpace& space) {
  SecurityProperty xi;
  xi.connections = partial_connections(space);
  auto complete = complete_connections(space);
  xi.connections.insert(complete.begin(), complete.end());
  return xi;
}

}  // namespace spc
