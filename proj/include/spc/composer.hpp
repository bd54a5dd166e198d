#pragma once

// Term composition. For every candidate surviving the endpoint filter, each
// concatenated message pair is fused: two ciphertexts under the same key
// merge into one, an encrypted first term absorbs the second into its
// cryptographic context, plain terms just pair up. Whenever a fused term
// replaces an original one, every dependent payload and connection end is
// rewritten to keep the extracted security property intact. Memory strands
// are then generated and every transmission is checked for constructability
// against static knowledge plus dynamic knowledge available at that point.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "spc/connections.hpp"
#include "spc/generator.hpp"
#include "spc/independence.hpp"
#include "spc/memory.hpp"
#include "spc/strand.hpp"
#include "spc/term.hpp"

namespace spc {

enum class ComposeAction : std::uint8_t {
  MergedKeptConnection,  // same key, an existing complete connection matched the body
  MergedUpdated,         // same key, connection sequence rewritten
  Embedded,              // second term pulled inside the first term's encryption
  Paired,                // no cryptographic context to preserve
};

inline std::string_view to_string(ComposeAction a) {
  switch (a) {
    case ComposeAction::MergedKeptConnection: return "merge";
    case ComposeAction::MergedUpdated: return "merge+update";
    case ComposeAction::Embedded: return "embed+update";
    case ComposeAction::Paired: return "pair";
  }
  return "?";
}

struct ComposedTerm {
  Term result;
  ComposeAction action{ComposeAction::Paired};
  bool update_connections{false};
};

/// One strand per distinct role across both protocols; a role present in
/// both gets the union of the two knowledge sets. Traces start empty.
inline KStrandSpace init_unified_space(const Protocol& p1, const Protocol& p2) {
  Protocol merged = merge_declarations(p1, p2);
  KStrandSpace space;
  for (const auto& role : merged.roles) {
    KStrand s;
    s.classifier = Classifier::Participant;
    s.participant = role;
    if (auto it = merged.knowledge.find(role); it != merged.knowledge.end())
      s.knowledge = it->second;
    space.strands.push_back(std::move(s));
  }
  return space;
}

/// Fuses the payloads of one concatenated pair. t1 comes from the first
/// protocol, whose property xi1 drives the branch choice; n1 is the node
/// transmitting t1 there.
inline ComposedTerm compose_terms(const Term& t1, const Term& t2, const SecurityProperty& xi1,
                                  NodeRef n1, NodeRef n2, bool embed = true) {
  (void)n2;
  if (t1.is_enc() && t2.is_enc() && t1.func() == t2.func() && t1.key() == t2.key()) {
    Term merged = Term::enc(Term::pair(t1.body(), t2.body()), t1.func(), t1.key());
    bool matched = false;
    for (const auto& c : xi1.connections) {
      if (c.kind != ConnectionKind::Complete) continue;
      if ((c.post.term == t1.body() && c.post.node == n1) ||
          (c.pre.term == t1.body() && c.pre.node == n1)) {
        matched = true;
        break;
      }
    }
    if (matched) return {merged, ComposeAction::MergedKeptConnection, false};
    return {merged, ComposeAction::MergedUpdated, true};
  }
  if (t1.is_enc() && embed) {
    Term result = Term::enc(Term::pair(t1.body(), t2), t1.func(), t1.key());
    return {result, ComposeAction::Embedded, true};
  }
  return {Term::pair(t1, t2), ComposeAction::Paired, false};
}

/// Replaces `modified` by `replacement` in every node payload and every
/// connection end. Substitution happens in a single pass over immutable
/// trees, so a term can never end up containing itself. Cryptographic
/// contexts are never stripped, so partial connections survive by
/// construction.
inline void propagate_connection_updates(KStrandSpace& space, const Term& modified,
                                         const Term& replacement, SecurityProperty& xi) {
  if (modified == replacement) return;
  for (auto& s : space.strands)
    for (auto& st : s.trace) st.payload = substitute(st.payload, modified, replacement);
  std::set<Connection> rewritten;
  for (const auto& c : xi.connections) {
    Connection nc = c;
    nc.pre.term = substitute(nc.pre.term, modified, replacement);
    nc.post.term = substitute(nc.post.term, modified, replacement);
    rewritten.insert(nc);
  }
  xi.connections = std::move(rewritten);
}

struct ConcatRecord {
  std::size_t i{0}, j{0};
  ComposeAction action{ComposeAction::Paired};
  Term result;
};

struct CompositionResult {
  GeneratedCandidate candidate;
  Protocol realized;
  KStrandSpace space;         // participant and memory strands
  SecurityProperty property;  // re-extracted from the participant strands
  std::vector<ConcatRecord> actions;
  std::vector<std::pair<Term, Term>> rewrites;  // accumulated original -> fused
  bool accepted{false};
  std::string reject_reason;
};

namespace detail {

inline void substitute_everywhere(std::vector<Term>& pay1, std::vector<Term>& pay2,
                                  std::vector<Message>& emitted, SecurityProperty& xi1,
                                  SecurityProperty& xi2, const Term& from, const Term& to) {
  for (auto& t : pay1) t = substitute(t, from, to);
  for (auto& t : pay2) t = substitute(t, from, to);
  for (auto& m : emitted) m.payload = substitute(m.payload, from, to);
  for (auto* xi : {&xi1, &xi2}) {
    std::set<Connection> rewritten;
    for (const auto& c : xi->connections) {
      Connection nc = c;
      nc.pre.term = substitute(nc.pre.term, from, to);
      nc.post.term = substitute(nc.post.term, from, to);
      rewritten.insert(nc);
    }
    xi->connections = std::move(rewritten);
  }
}

}  // namespace detail

/// Runs the whole composition pipeline for one candidate.
inline CompositionResult compose_candidate(const GeneratedCandidate& candidate, const Protocol& p1,
                                           const Protocol& p2, bool embed = true) {
  if (!endpoints_compatible(candidate, p1, p2))
    throw std::invalid_argument("compose_candidate: candidate failed the endpoint filter");

  CompositionResult res;
  res.candidate = candidate;

  KStrandSpace space1 = to_strand_space(p1);
  KStrandSpace space2 = to_strand_space(p2);
  SecurityProperty xi1 = security_property(space1);
  SecurityProperty xi2 = security_property(space2);

  std::vector<Term> pay1, pay2;
  for (const auto& m : p1.messages) pay1.push_back(m.payload);
  for (const auto& m : p2.messages) pay2.push_back(m.payload);

  std::vector<Message> emitted;
  for (const auto& step : candidate.steps) {
    switch (step.kind) {
      case Step::Kind::Take1: {
        const auto& m = p1.messages[step.i - 1];
        emitted.push_back({m.sender, m.receiver, pay1[step.i - 1]});
        break;
      }
      case Step::Kind::Take2: {
        const auto& m = p2.messages[step.j - 1];
        emitted.push_back({m.sender, m.receiver, pay2[step.j - 1]});
        break;
      }
      case Step::Kind::Concat: {
        const auto& m1 = p1.messages[step.i - 1];
        Term t1 = pay1[step.i - 1];
        Term t2 = pay2[step.j - 1];
        NodeRef n1 = space1.cross_edges[step.i - 1].from;
        NodeRef n2 = space2.cross_edges[step.j - 1].from;
        ComposedTerm ct = compose_terms(t1, t2, xi1, n1, n2, embed);
        for (const Term& original : {t1, t2}) {
          if (subterm(original, ct.result)) continue;  // survived intact, nothing depends on it
          detail::substitute_everywhere(pay1, pay2, emitted, xi1, xi2, original, ct.result);
          res.rewrites.emplace_back(original, ct.result);
        }
        emitted.push_back({m1.sender, m1.receiver, ct.result});
        res.actions.push_back({step.i, step.j, ct.action, ct.result});
        break;
      }
    }
  }

  res.realized = merge_declarations(p1, p2);
  res.realized.name += "_" + std::to_string(candidate.index);
  res.realized.messages = std::move(emitted);

  KStrandSpace participant_space = to_strand_space(res.realized);
  res.property = security_property(participant_space);

  KeyInverses inverses = KeyInverses::from(res.realized);
  res.accepted = true;
  for (const auto& s : participant_space.strands) {
    for (std::size_t pos = 1; pos <= s.trace.size() && res.accepted; ++pos) {
      if (s.trace[pos - 1].sign != Sign::Plus) continue;
      Term mem = memory_term_before(s, pos);
      if (!constructable(s.trace[pos - 1].payload, s.knowledge, mem, inverses)) {
        res.accepted = false;
        res.reject_reason = s.participant.name + " cannot construct " +
                            s.trace[pos - 1].payload.str() + " at node " + std::to_string(pos);
      }
    }
  }

  res.space = add_memory_strands(participant_space);
  return res;
}

/// Smallest realized message count among the accepted results; ties resolve
/// to the lexicographically smallest step sequence, which is emission order.
inline const CompositionResult& select_min_messages(const std::vector<CompositionResult>& results) {
  const CompositionResult* best = nullptr;
  for (const auto& r : results) {
    if (!r.accepted) continue;
    if (!best || r.realized.messages.size() < best->realized.messages.size()) best = &r;
  }
  if (!best) throw std::invalid_argument("select_min_messages: no accepted composition");
  return *best;
}

struct ComposeOptions {
  bool auto_rename{true};
  bool embed{true};
  std::uint64_t limit{0};  // 0 = compose every filtered candidate
  unsigned jobs{1};
};

struct ComposeSummary {
  Protocol p1, p2;  // after any renaming
  RenameReport renames;
  std::uint64_t generated{0};
  std::uint64_t filtered{0};
  std::uint64_t accepted{0};
  std::vector<CompositionResult> results;      // in candidate order
  std::optional<std::size_t> selected;         // index into results
};

inline ComposeSummary compose_all(const Protocol& p1_in, const Protocol& p2_in,
                                  const ComposeOptions& options = {}) {
  ComposeSummary summary;
  summary.p1 = p1_in;
  summary.p2 = p2_in;
  if (options.auto_rename) {
    auto [a, b, report] = rename_conflicts(p1_in, p2_in);
    summary.p1 = std::move(a);
    summary.p2 = std::move(b);
    summary.renames = std::move(report);
  }

  std::vector<GeneratedCandidate> work;
  CandidateStream stream = generate(summary.p1, summary.p2);
  while (auto c = stream.next()) {
    ++summary.generated;
    if (!endpoints_compatible(*c, summary.p1, summary.p2)) continue;
    ++summary.filtered;
    if (options.limit == 0 || work.size() < options.limit) work.push_back(std::move(*c));
  }

  summary.results.resize(work.size());
  unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1 || work.size() < 2) {
    for (std::size_t k = 0; k < work.size(); ++k)
      summary.results[k] = compose_candidate(work[k], summary.p1, summary.p2, options.embed);
  } else {
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
      while (true) {
        std::size_t k = cursor.fetch_add(1);
        if (k >= work.size()) return;
        summary.results[k] = compose_candidate(work[k], summary.p1, summary.p2, options.embed);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t k = 0; k < summary.results.size(); ++k) {
    if (!summary.results[k].accepted) continue;
    ++summary.accepted;
    if (!summary.selected ||
        summary.results[k].realized.messages.size() <
            summary.results[*summary.selected].realized.messages.size())
      summary.selected = k;
  }
  return summary;
}

/// The rewrite image of a connection under the accumulated substitutions.
inline Connection rewrite_image(Connection c,
                                const std::vector<std::pair<Term, Term>>& rewrites) {
  for (const auto& [from, to] : rewrites) {
    c.pre.term = substitute(c.pre.term, from, to);
    c.post.term = substitute(c.post.term, from, to);
  }
  return c;
}

/// True when a connection with the given kind and end terms exists in the
/// property, regardless of node positions (the composed space renumbers them).
inline bool property_contains_terms(const SecurityProperty& xi, ConnectionKind kind,
                                    const Term& pre, const Term& post) {
  for (const auto& c : xi.connections)
    if (c.kind == kind && c.pre.term == pre && c.post.term == post) return true;
  return false;
}

}  // namespace spc
