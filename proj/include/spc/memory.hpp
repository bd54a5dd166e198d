#pragma once

// Dynamic knowledge. Each participant strand gets a companion memory strand:
// every reception is echoed to the memory under a private mk key, and the
// memory answers with the accumulated knowledge term. The constructable
// predicate then decides whether a transmitted term is derivable from static
// knowledge plus that memory term.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "spc/strand.hpp"
#include "spc/term.hpp"

namespace spc {

inline constexpr std::string_view kMemoryKeyPrefix = "_mem_";

/// Knowledge grows to the right: the previous knowledge term always remains
/// a subterm of the new one.
inline Term gen_know(const Term& received, const Term& previous) {
  if (previous.is_empty()) return received;
  return Term::pair(previous, received);
}

struct MemoryPair {
  KStrand participant;
  KStrand memory;
  Atom key;  // the private mk key shared by the two strands
};

namespace detail {

inline bool contains_mk(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::Enc:
      return t.func() == Func::Mk || contains_mk(t.body()) || contains_mk(t.key());
    case Term::Kind::Pair:
      return contains_mk(t.left()) || contains_mk(t.right());
    default:
      return false;
  }
}

}  // namespace detail

/// Rewrites one participant strand into the participant/memory pair.
/// Transmissions are copied; each reception r is followed by +{r}mk(Km) and
/// -{t_know}mk(Km) on the participant side, mirrored on the memory side.
inline MemoryPair gen_memory_strands(const KStrand& s) {
  if (s.classifier != Classifier::Participant)
    throw std::invalid_argument("gen_memory_strands: expected a participant strand");
  for (const auto& st : s.trace)
    if (detail::contains_mk(st.payload))
      throw std::invalid_argument("gen_memory_strands: strand already carries mk terms");

  Atom km{std::string(kMemoryKeyPrefix) + s.participant.name, Sort::Key};
  Term km_term = Term::atom(km);

  MemoryPair out;
  out.key = km;
  out.participant.classifier = Classifier::Participant;
  out.memory.classifier = Classifier::Memory;
  out.participant.participant = s.participant;
  out.memory.participant = s.participant;
  out.participant.knowledge = s.knowledge;
  out.participant.knowledge.push_back(km_term);
  out.memory.knowledge = out.participant.knowledge;

  Term know = Term::empty();
  for (const auto& st : s.trace) {
    out.participant.trace.push_back(st);
    if (st.sign != Sign::Minus) continue;
    Term echo = Term::enc(st.payload, Func::Mk, km_term);
    know = gen_know(st.payload, know);
    Term answer = Term::enc(know, Func::Mk, km_term);
    out.participant.trace.push_back({Sign::Plus, echo});
    out.memory.trace.push_back({Sign::Minus, echo});
    out.participant.trace.push_back({Sign::Minus, answer});
    out.memory.trace.push_back({Sign::Plus, answer});
  }
  return out;
}

/// Knowledge term accumulated from the receptions strictly before the given
/// 1-based position of an original (memory-free) trace.
inline Term memory_term_before(const KStrand& s, std::size_t index) {
  Term know = Term::empty();
  for (std::size_t i = 0; i + 1 < index && i < s.trace.size(); ++i)
    if (s.trace[i].sign == Sign::Minus) know = gen_know(s.trace[i].payload, know);
  return know;
}

/// Extends a space with one memory strand per participant strand. Memory
/// strands are appended after the existing ones, original cross edges are
/// remapped around the inserted mk nodes, and the mk exchanges themselves
/// become cross edges.
inline KStrandSpace add_memory_strands(const KStrandSpace& space) {
  KStrandSpace out;
  std::size_t base = space.strands.size();
  std::vector<std::vector<std::size_t>> remap(base);  // old index -> new index, per strand
  std::vector<KStrand> memories;
  memories.reserve(base);

  for (std::size_t si = 0; si < base; ++si) {
    const auto& s = space.strands[si];
    auto pair = gen_memory_strands(s);
    auto& m = remap[si];
    m.resize(s.trace.size(), 0);
    std::size_t receptions = 0;
    for (std::size_t i = 1; i <= s.trace.size(); ++i) {
      m[i - 1] = i + 2 * receptions;  // shift past the mk exchanges inserted so far
      if (s.trace[i - 1].sign == Sign::Minus) ++receptions;
    }
    out.strands.push_back(std::move(pair.participant));
    memories.push_back(std::move(pair.memory));
  }
  for (auto& m : memories) out.strands.push_back(std::move(m));

  for (const auto& e : space.cross_edges) {
    out.cross_edges.push_back({NodeRef{e.from.strand, remap[e.from.strand][e.from.index - 1]},
                               NodeRef{e.to.strand, remap[e.to.strand][e.to.index - 1]}});
  }
  for (std::size_t si = 0; si < base; ++si) {
    const auto& part = out.strands[si];
    std::size_t mem_index = base + si;
    std::size_t mem_pos = 0;
    for (std::size_t i = 0; i < part.trace.size(); ++i) {
      if (!detail::contains_mk(part.trace[i].payload)) continue;
      ++mem_pos;
      NodeRef pn{si, i + 1};
      NodeRef mn{mem_index, mem_pos};
      if (part.trace[i].sign == Sign::Plus)
        out.cross_edges.push_back({pn, mn});
      else
        out.cross_edges.push_back({mn, pn});
    }
  }
  return out;
}

/// Inverse-key resolution. sk and mk are symmetric; pk/pvk invert through
/// declared keypairs; h is one way.
class KeyInverses {
 public:
  KeyInverses() = default;

  static KeyInverses from(const Protocol& p) {
    KeyInverses inv;
    for (const auto& [pub, priv] : p.keypairs) {
      inv.pairs_[pub] = priv;
      inv.pairs_[priv] = pub;
    }
    return inv;
  }

  std::optional<Term> inverse_key(Func f, const Term& key) const {
    switch (f) {
      case Func::Sk:
      case Func::Mk:
        return key;
      case Func::Pk:
      case Func::Pvk: {
        if (!key.is_atom()) return std::nullopt;
        auto it = pairs_.find(key.atom_ref());
        if (it == pairs_.end()) return std::nullopt;
        return Term::atom(it->second);
      }
      case Func::H:
        return std::nullopt;
    }
    return std::nullopt;
  }

 private:
  std::map<Atom, Atom> pairs_;
};

namespace detail {

inline bool synthesize(const Term& t, const std::set<Term>& analyzed) {
  if (t.is_empty()) return true;
  if (analyzed.count(t)) return true;
  switch (t.kind()) {
    case Term::Kind::Pair:
      return synthesize(t.left(), analyzed) && synthesize(t.right(), analyzed);
    case Term::Kind::Enc:
      return synthesize(t.body(), analyzed) && synthesize(t.key(), analyzed);
    default:
      return false;
  }
}

}  // namespace detail

/// Derivability of `target` from the static knowledge plus the memory term,
/// closed under pairing, projection, encryption with derivable keys and
/// decryption with derivable inverse keys. Decomposition first saturates the
/// analyzed set (a subset of the input's subterms, so this terminates), then
/// the target is checked compositionally.
inline bool constructable(const Term& target, const std::vector<Term>& knowledge,
                          const Term& memory, const KeyInverses& inverses = {}) {
  std::set<Term> analyzed;
  for (const auto& t : knowledge)
    if (!t.is_empty()) analyzed.insert(t);
  if (!memory.is_empty()) analyzed.insert(memory);

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Term> fresh;
    for (const auto& t : analyzed) {
      if (t.is_pair()) {
        if (!analyzed.count(t.left())) fresh.push_back(t.left());
        if (!analyzed.count(t.right())) fresh.push_back(t.right());
      } else if (t.is_enc()) {
        if (analyzed.count(t.body())) continue;
        auto inv = inverses.inverse_key(t.func(), t.key());
        if (inv && detail::synthesize(*inv, analyzed)) fresh.push_back(t.body());
      }
    }
    for (auto& t : fresh) {
      if (analyzed.insert(std::move(t)).second) changed = true;
    }
  }
  return detail::synthesize(target, analyzed);
}

}  // namespace spc
