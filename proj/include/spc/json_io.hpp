#pragma once

// JSON views of every report the command line emits. Field layouts are
// documented by the JSON Schema files under schemas/.

#include <string>

#include <json.hpp>

#include "spc/composer.hpp"
#include "spc/connections.hpp"
#include "spc/generator.hpp"
#include "spc/independence.hpp"
#include "spc/parser.hpp"
#include "spc/strand.hpp"
#include "spc/term.hpp"

namespace spc {

using json = nlohmann::json;

inline json to_json(const Protocol& p) {
  json sorts = json::object();
  for (const auto& a : p.declared_atoms()) sorts[a.name] = std::string(to_string(a.sort));
  json knowledge = json::object();
  for (const auto& [role, terms] : p.knowledge) {
    json list = json::array();
    for (const auto& t : terms) list.push_back(t.str());
    knowledge[role.name] = std::move(list);
  }
  json secrets = json::array();
  for (const auto& s : p.secrets) secrets.push_back(s.str());
  json messages = json::array();
  for (std::size_t i = 0; i < p.messages.size(); ++i) {
    const auto& m = p.messages[i];
    messages.push_back({{"index", i + 1},
                        {"sender", m.sender.name},
                        {"receiver", m.receiver.name},
                        {"payload", m.payload.str()}});
  }
  json keypairs = json::array();
  for (const auto& [pub, priv] : p.keypairs) keypairs.push_back({pub.name, priv.name});
  json out = {{"name", p.name},
              {"roles", json::array()},
              {"sorts", std::move(sorts)},
              {"knowledge", std::move(knowledge)},
              {"secrets", std::move(secrets)},
              {"messages", std::move(messages)}};
  for (const auto& r : p.roles) out["roles"].push_back(r.name);
  if (!p.keypairs.empty()) out["keypairs"] = std::move(keypairs);
  return out;
}

inline json to_json(const Diagnostic& d) {
  return {{"severity", d.severity == Severity::Error ? "error" : "warning"},
          {"line", d.line},
          {"col", d.col},
          {"message", d.message}};
}

inline json node_json(const KStrandSpace& space, NodeRef n) {
  return {{"strand", space.strands.at(n.strand).participant.name},
          {"index", n.index},
          {"sign", std::string(1, sign_char(node_sign(space, n)))}};
}

inline json to_json(const Connection& c, const KStrandSpace& space) {
  json pre = node_json(space, c.pre.node);
  pre["term"] = c.pre.term.str();
  json post = node_json(space, c.post.node);
  post["term"] = c.post.term.str();
  return {{"kind", std::string(to_string(c.kind))}, {"pre", std::move(pre)},
          {"post", std::move(post)}};
}

inline json to_json(const SecrecyViolation& v, const KStrandSpace& offending_space) {
  return {{"secret", v.secret.str()},
          {"offending_term", v.offending_term.str()},
          {"location", node_json(offending_space, v.location)},
          {"protocol", v.owning_protocol}};
}

inline json to_json(const StructuralClash& c) {
  return {{"signature", c.signature.str()},
          {"key_signature", c.key_signature.str()},
          {"term1", c.term1.str()},
          {"term2", c.term2.str()}};
}

inline json to_json(const KStrandSpace& space, bool include_memory = true) {
  json strands = json::array();
  for (const auto& s : space.strands) {
    if (!include_memory && s.classifier == Classifier::Memory) continue;
    json trace = json::array();
    for (const auto& st : s.trace)
      trace.push_back(std::string(1, sign_char(st.sign)) + st.payload.str());
    json knowledge = json::array();
    for (const auto& t : s.knowledge) knowledge.push_back(t.str());
    strands.push_back({{"participant", s.participant.name},
                       {"classifier", std::string(to_string(s.classifier))},
                       {"knowledge", std::move(knowledge)},
                       {"trace", std::move(trace)}});
  }
  return {{"strands", std::move(strands)}};
}

inline json to_json(const GeneratedCandidate& c) {
  json steps = json::array();
  for (const auto& s : c.steps) {
    switch (s.kind) {
      case Step::Kind::Take1: steps.push_back({{"take1", s.i}}); break;
      case Step::Kind::Take2: steps.push_back({{"take2", s.j}}); break;
      case Step::Kind::Concat: steps.push_back({{"concat", {s.i, s.j}}}); break;
    }
  }
  return {{"index", c.index}, {"steps", std::move(steps)}};
}

inline json to_json(const CompositionResult& r, bool include_memory = false) {
  json actions = json::array();
  for (const auto& a : r.actions)
    actions.push_back({{"pair", {a.i, a.j}},
                       {"action", std::string(to_string(a.action))},
                       {"result", a.result.str()}});
  json connections = json::array();
  KStrandSpace participant_space = to_strand_space(r.realized);
  for (const auto& c : r.property.connections)
    connections.push_back(to_json(c, participant_space));
  json out = {{"candidate", to_json(r.candidate)},
              {"accepted", r.accepted},
              {"actions", std::move(actions)},
              {"protocol", to_json(r.realized)},
              {"connections", std::move(connections)},
              {"space", to_json(r.space, include_memory)}};
  if (!r.accepted) out["reject_reason"] = r.reject_reason;
  return out;
}

inline json summary_json(const ComposeSummary& s) {
  json renames = json::array();
  for (const auto& [old, fresh] : s.renames.renamed)
    renames.push_back({{"from", old.name}, {"to", fresh.name}});
  json out = {{"p1", s.p1.name},
              {"p2", s.p2.name},
              {"generated", s.generated},
              {"filtered", s.filtered},
              {"accepted", s.accepted},
              {"renames", std::move(renames)}};
  if (s.selected) {
    const auto& sel = s.results[*s.selected];
    out["selected"] = {{"candidate", sel.candidate.index},
                       {"messages", sel.realized.messages.size()}};
  }
  return out;
}

}  // namespace spc
