#pragma once

// Shared test fixtures: deterministic random generators for terms, strands
// and protocols, plus independent oracles the implementation is checked
// against. Oracles deliberately reimplement their queries from scratch
// (worklist subtree enumeration, naive closure fixpoints, explicit path
// recursion) so they share as little code as possible with the library.

#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spc/spc.hpp"

namespace testsupport {

using namespace spc;

// ---------------------------------------------------------------- corpus --

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Protocol load_corpus(const std::string& name) {
  auto result = parse_protocol(read_file(std::string(SPC_CORPUS_DIR) + "/" + name));
  if (!result.ok()) {
    std::string msg = "corpus file " + name + " failed to parse:";
    for (const auto& d : result.diagnostics) msg += "\n  " + d.str();
    throw std::runtime_error(msg);
  }
  return *result.protocol;
}

inline Protocol woo_lam() { return load_corpus("woo_lam_pi3.spc"); }
inline Protocol lowe_yahalom() { return load_corpus("lowe_yahalom.spc"); }

// ------------------------------------------------------------ generators --

struct Rng {
  std::mt19937_64 eng;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  std::size_t below(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng);
  }
  bool chance(double p) { return std::uniform_real_distribution<>(0.0, 1.0)(eng) < p; }
};

inline std::vector<Atom> default_vocabulary() {
  return {
      {"A", Sort::Role},   {"B", Sort::Role},   {"S", Sort::Role},
      {"Na", Sort::Nonce}, {"Nb", Sort::Nonce}, {"Nc", Sort::Nonce},
      {"Kas", Sort::Key},  {"Kbs", Sort::Key},  {"Kab", Sort::Key},
  };
}

/// Random term of depth at most `depth`, never using mk.
inline Term random_term(Rng& rng, std::size_t depth,
                        const std::vector<Atom>& vocab = default_vocabulary()) {
  if (depth <= 1 || rng.chance(0.35)) return Term::atom(vocab[rng.below(vocab.size())]);
  if (rng.chance(0.5))
    return Term::pair(random_term(rng, depth - 1, vocab), random_term(rng, depth - 1, vocab));
  static const Func funcs[] = {Func::Sk, Func::Pk, Func::Pvk, Func::H};
  return Term::enc(random_term(rng, depth - 1, vocab), funcs[rng.below(4)],
                   random_term(rng, depth - 1, vocab));
}

/// Uniformly random subtree of t.
inline Term random_subtree(Rng& rng, const Term& t) {
  std::vector<Term> pool;
  std::vector<Term> work{t};
  while (!work.empty()) {
    Term cur = work.back();
    work.pop_back();
    pool.push_back(cur);
    if (cur.is_pair()) {
      work.push_back(cur.left());
      work.push_back(cur.right());
    } else if (cur.is_enc()) {
      work.push_back(cur.body());
      work.push_back(cur.key());
    }
  }
  return pool[rng.below(pool.size())];
}

inline KStrand random_strand(Rng& rng, std::size_t max_len = 6) {
  KStrand s;
  s.participant = Atom{"P", Sort::Role};
  s.classifier = Classifier::Participant;
  std::size_t len = rng.below(max_len + 1);
  for (std::size_t i = 0; i < len; ++i)
    s.trace.push_back({rng.chance(0.5) ? Sign::Plus : Sign::Minus, random_term(rng, 3)});
  return s;
}

/// Random valid protocol in canonical declaration layout.
inline Protocol random_protocol(Rng& rng) {
  Protocol p;
  p.name = "r" + std::to_string(rng.below(100000));
  std::size_t role_count = 2 + rng.below(2);
  for (std::size_t i = 0; i < role_count; ++i)
    p.roles.push_back({"R" + std::to_string(i), Sort::Role});
  std::size_t nonce_count = 1 + rng.below(3);
  for (std::size_t i = 0; i < nonce_count; ++i)
    p.nonces.push_back({"N" + std::to_string(i), Sort::Nonce});
  std::size_t key_count = rng.below(3);
  for (std::size_t i = 0; i < key_count; ++i)
    p.keys.push_back({"K" + std::to_string(i), Sort::Key});

  std::vector<Atom> vocab = p.declared_atoms();
  for (const auto& role : p.roles) {
    if (!rng.chance(0.7)) continue;
    std::vector<Term> terms;
    std::size_t n = 1 + rng.below(3);
    for (std::size_t i = 0; i < n; ++i) terms.push_back(random_term(rng, 2, vocab));
    p.knowledge[role] = std::move(terms);
  }
  std::size_t message_count = 1 + rng.below(4);
  for (std::size_t i = 0; i < message_count; ++i) {
    Atom sender = p.roles[rng.below(p.roles.size())];
    Atom receiver = sender;
    while (receiver == sender) receiver = p.roles[rng.below(p.roles.size())];
    p.messages.push_back({sender, receiver, random_term(rng, 3, vocab)});
  }
  if (rng.chance(0.4)) {
    const Term& payload = p.messages[rng.below(p.messages.size())].payload;
    p.secrets.push_back(random_subtree(rng, payload));
  }
  return p;
}

// --------------------------------------------------------------- oracles --

/// Worklist subtree enumeration, independent of spc::subterm.
inline std::set<Term> oracle_subtrees(const Term& t) {
  std::set<Term> out;
  std::vector<Term> work{t};
  while (!work.empty()) {
    Term cur = work.back();
    work.pop_back();
    if (!out.insert(cur).second) continue;
    if (cur.is_pair()) {
      work.push_back(cur.left());
      work.push_back(cur.right());
    } else if (cur.is_enc()) {
      work.push_back(cur.body());
      work.push_back(cur.key());
    }
  }
  return out;
}

inline bool oracle_subterm(const Term& t1, const Term& t2) {
  return oracle_subtrees(t2).count(t1) > 0;
}

/// All lattice paths over an m x n grid, by explicit recursion.
inline void oracle_paths_rec(std::size_t i, std::size_t j, std::size_t m, std::size_t n,
                             std::vector<Step>& path, std::vector<std::vector<Step>>& out) {
  if (i == m && j == n) {
    out.push_back(path);
    return;
  }
  if (i < m) {
    path.push_back({Step::Kind::Take1, i + 1, 0});
    oracle_paths_rec(i + 1, j, m, n, path, out);
    path.pop_back();
  }
  if (j < n) {
    path.push_back({Step::Kind::Take2, 0, j + 1});
    oracle_paths_rec(i, j + 1, m, n, path, out);
    path.pop_back();
  }
  if (i < m && j < n) {
    path.push_back({Step::Kind::Concat, i + 1, j + 1});
    oracle_paths_rec(i + 1, j + 1, m, n, path, out);
    path.pop_back();
  }
}

inline std::vector<std::vector<Step>> oracle_all_paths(std::size_t m, std::size_t n) {
  std::vector<std::vector<Step>> out;
  std::vector<Step> path;
  oracle_paths_rec(0, 0, m, n, path, out);
  return out;
}

/// Naive breadth-first closure over the subtree universe of the inputs.
/// Composition only ever needs subtrees of the target, decomposition only
/// subtrees of the knowledge, so restricting to the universe is exact.
inline bool oracle_derivable(const Term& target, const std::vector<Term>& knowledge,
                             const Term& memory, const KeyInverses& inverses = {}) {
  if (target.is_empty()) return true;
  std::set<Term> universe = oracle_subtrees(target);
  std::set<Term> derived;
  for (const auto& t : knowledge) {
    if (t.is_empty()) continue;
    auto sub = oracle_subtrees(t);
    universe.insert(sub.begin(), sub.end());
    derived.insert(t);
  }
  if (!memory.is_empty()) {
    auto sub = oracle_subtrees(memory);
    universe.insert(sub.begin(), sub.end());
    derived.insert(memory);
  }

  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Term> additions;
    for (const auto& t : derived) {
      if (t.is_pair()) {
        additions.push_back(t.left());
        additions.push_back(t.right());
      } else if (t.is_enc()) {
        auto inv = inverses.inverse_key(t.func(), t.key());
        if (inv && derived.count(*inv)) additions.push_back(t.body());
      }
    }
    for (const auto& u : universe) {
      if (derived.count(u)) continue;
      if (u.is_pair() && derived.count(u.left()) && derived.count(u.right()))
        additions.push_back(u);
      if (u.is_enc() && derived.count(u.body()) && derived.count(u.key())) additions.push_back(u);
    }
    for (const auto& a : additions)
      if (derived.insert(a).second) changed = true;
  }
  return derived.count(target) > 0;
}

/// Connection extraction re-derived with oracle containment checks.
inline std::set<Connection> oracle_connections(const KStrandSpace& space, ConnectionKind kind) {
  struct Pos {
    NodeRef node;
    Term payload;
  };
  std::vector<Pos> nodes;
  for (std::size_t si = 0; si < space.strands.size(); ++si)
    for (std::size_t i = 0; i < space.strands[si].trace.size(); ++i)
      if (space.strands[si].trace[i].sign == Sign::Plus)
        nodes.push_back({NodeRef{si, i + 1}, space.strands[si].trace[i].payload});

  std::set<Connection> out;
  for (const auto& p : nodes) {
    auto sub1 = oracle_subtrees(p.payload);
    for (const auto& q : nodes) {
      if (p.node == q.node) continue;
      auto sub2 = oracle_subtrees(q.payload);
      for (const auto& t1 : sub1) {
        for (const auto& t2 : sub2) {
          if (kind == ConnectionKind::Partial) {
            if (t1.is_enc() || t1.is_empty() || !t2.is_enc()) continue;
            if (!oracle_subtrees(t2).count(t1)) continue;
            out.insert({kind, {p.node, t1}, {q.node, t2}});
          } else {
            if (!t1.is_enc() || !t2.is_enc() || t1 == t2) continue;
            if (!sub2.count(t1)) continue;  // t1 must also travel in the post payload
            auto inside = oracle_subtrees(t2);
            if (inside.count(t1) || inside.count(t1.body()))
              out.insert({kind, {p.node, t1}, {q.node, t2}});
          }
        }
      }
    }
  }
  return out;
}

/// Longest chain of endpoint-compatible pairs, strictly increasing on both
/// sides: the maximum number of concat steps any candidate can carry.
inline std::size_t oracle_max_concat_matching(const Protocol& p1, const Protocol& p2) {
  std::vector<std::pair<std::size_t, std::size_t>> compat;
  for (std::size_t i = 0; i < p1.messages.size(); ++i)
    for (std::size_t j = 0; j < p2.messages.size(); ++j)
      if (p1.messages[i].sender == p2.messages[j].sender &&
          p1.messages[i].receiver == p2.messages[j].receiver)
        compat.emplace_back(i, j);
  std::size_t best = 0;
  std::vector<std::size_t> chain(compat.size(), 1);
  for (std::size_t a = 0; a < compat.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b)
      if (compat[b].first < compat[a].first && compat[b].second < compat[a].second)
        chain[a] = std::max(chain[a], chain[b] + 1);
    best = std::max(best, chain[a]);
  }
  return best;
}

inline bool step_lex_less(const std::vector<Step>& a, const std::vector<Step>& b) {
  auto rank = [](const Step& s) { return static_cast<int>(s.kind); };
  for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
    if (rank(a[k]) != rank(b[k])) return rank(a[k]) < rank(b[k]);
  }
  return a.size() < b.size();
}

}  // namespace testsupport
