// Command line front end: parse, check, connections, generate, compose.
// Every command prints a text report by default and JSON with --format json;
// outputs are deterministic so runs can be diffed byte for byte.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "spc/json_io.hpp"
#include "spc/spc.hpp"

namespace fs = std::filesystem;
using namespace spc;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitViolation = 1;
constexpr int kExitUsage = 2;

bool color_enabled() {
  const char* v = std::getenv("SPC_COLOR");
  return v && *v && std::string_view(v) != "0";
}

std::string paint(const std::string& text, const char* code) {
  if (!color_enabled()) return text;
  return std::string("\033[") + code + "m" + text + "\033[0m";
}

std::string red(const std::string& s) { return paint(s, "31"); }
std::string green(const std::string& s) { return paint(s, "32"); }

struct LoadedSpec {
  Protocol protocol;
  std::vector<Diagnostic> diagnostics;
};

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void print_diagnostics(const std::string& path, const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << path << ": " << d.str() << "\n";
}

/// Loads and parses; on failure prints diagnostics and exits with code 2.
LoadedSpec require_spec(const std::string& path) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << red("error") << ": cannot read " << path << "\n";
    std::exit(kExitUsage);
  }
  auto result = parse_protocol(*text);
  if (!result.ok()) {
    print_diagnostics(path, result.diagnostics);
    std::exit(kExitUsage);
  }
  return {*result.protocol, result.diagnostics};
}

std::string node_label(const KStrandSpace& space, NodeRef n) {
  return space.strands.at(n.strand).participant.name + "." + std::to_string(n.index);
}

int cmd_parse(const std::string& path, const std::string& format) {
  auto text = read_file(path);
  if (!text) {
    std::cerr << red("error") << ": cannot read " << path << "\n";
    return kExitUsage;
  }
  auto result = parse_protocol(*text);
  if (!result.ok()) {
    print_diagnostics(path, result.diagnostics);
    return kExitViolation;
  }
  const Protocol& p = *result.protocol;
  if (format == "json") {
    json out = to_json(p);
    if (!result.diagnostics.empty()) {
      out["warnings"] = json::array();
      for (const auto& d : result.diagnostics) out["warnings"].push_back(to_json(d));
    }
    std::cout << out.dump(2) << "\n";
    return kExitClean;
  }
  print_diagnostics(path, result.diagnostics);  // warnings only at this point
  std::cout << "protocol " << p.name << "\n";
  std::cout << "roles:";
  for (const auto& r : p.roles) std::cout << " " << r.name;
  std::cout << "\nmessages: " << p.messages.size() << "\n";
  std::cout << "secrets:";
  if (p.secrets.empty()) {
    std::cout << " (none)";
  } else {
    for (const auto& s : p.secrets) std::cout << " " << s.str();
  }
  std::cout << "\n";
  return kExitClean;
}

int cmd_check(const std::string& path1, const std::string& path2, bool auto_rename,
              const std::string& format) {
  Protocol p1 = require_spec(path1).protocol;
  Protocol p2 = require_spec(path2).protocol;

  RenameReport renames;
  if (auto_rename) {
    auto [a, b, report] = rename_conflicts(p1, p2);
    p1 = std::move(a);
    p2 = std::move(b);
    renames = std::move(report);
  }

  auto violations = check_secrecy_independence(p1, p2);
  auto clashes = check_structural_independence(p1, p2);
  bool clean = violations.empty() && clashes.empty();

  KStrandSpace space1 = to_strand_space(p1);
  KStrandSpace space2 = to_strand_space(p2);
  auto space_for = [&](const SecrecyViolation& v) -> const KStrandSpace& {
    return v.owning_protocol == p1.name ? space1 : space2;
  };

  if (format == "json") {
    json out = {{"p1", p1.name},     {"p2", p2.name},
                {"clean", clean},    {"secrecy_violations", json::array()},
                {"structural_clashes", json::array()}, {"renames", json::array()}};
    for (const auto& v : violations)
      out["secrecy_violations"].push_back(to_json(v, space_for(v)));
    for (const auto& c : clashes) out["structural_clashes"].push_back(to_json(c));
    for (const auto& [old, fresh] : renames.renamed)
      out["renames"].push_back({{"from", old.name}, {"to", fresh.name}});
    std::cout << out.dump(2) << "\n";
    return clean ? kExitClean : kExitViolation;
  }

  for (const auto& [old, fresh] : renames.renamed)
    std::cout << "renamed: " << old.name << " -> " << fresh.name << " (in " << p2.name << ")\n";
  std::cout << "secrecy violations: " << violations.size() << "\n";
  for (const auto& v : violations) {
    std::cout << "  [" << v.owning_protocol << "] secret " << v.secret.str() << " exposed in "
              << v.offending_term.str() << " at " << node_label(space_for(v), v.location) << "\n";
  }
  std::cout << "structural clashes: " << clashes.size() << "\n";
  for (const auto& c : clashes) {
    std::cout << "  " << c.term1.str() << " vs " << c.term2.str() << " (shape "
              << c.signature.str() << ")\n";
  }
  std::cout << "result: " << (clean ? green("clean") : red("violations found")) << "\n";
  return clean ? kExitClean : kExitViolation;
}

int cmd_connections(const std::string& path, const std::string& kind,
                    const std::string& format) {
  Protocol p = require_spec(path).protocol;
  KStrandSpace space = to_strand_space(p);
  auto partials = partial_connections(space);
  auto completes = complete_connections(space);

  bool show_partial = kind == "all" || kind == "partial";
  bool show_complete = kind == "all" || kind == "complete";

  if (format == "json") {
    json out = {{"protocol", p.name}, {"connections", json::array()}};
    if (show_partial)
      for (const auto& c : partials) out["connections"].push_back(to_json(c, space));
    if (show_complete)
      for (const auto& c : completes) out["connections"].push_back(to_json(c, space));
    out["partial_count"] = partials.size();
    out["complete_count"] = completes.size();
    std::cout << out.dump(2) << "\n";
    return kExitClean;
  }

  auto print_connection = [&](const Connection& c) {
    std::cout << "  " << c.pre.term.str() << " @ " << node_label(space, c.pre.node)
              << (c.kind == ConnectionKind::Partial ? "  ->p  " : "  ->c  ")
              << c.post.term.str() << " @ " << node_label(space, c.post.node) << "\n";
  };
  if (show_partial) {
    std::cout << "partial: " << partials.size() << "\n";
    for (const auto& c : partials) print_connection(c);
  }
  if (show_complete) {
    std::cout << "complete: " << completes.size() << "\n";
    for (const auto& c : completes) print_connection(c);
  }
  return kExitClean;
}

int cmd_generate(const std::string& path1, const std::string& path2, bool list,
                 std::uint64_t limit, const std::string& format) {
  Protocol p1 = require_spec(path1).protocol;
  Protocol p2 = require_spec(path2).protocol;

  std::uint64_t generated = 0, filtered = 0;
  std::vector<GeneratedCandidate> kept;
  CandidateStream stream = generate(p1, p2);
  while (auto c = stream.next()) {
    ++generated;
    if (!endpoints_compatible(*c, p1, p2)) continue;
    ++filtered;
    if (list && (limit == 0 || kept.size() < limit)) kept.push_back(std::move(*c));
  }

  if (format == "json") {
    json out = {{"p1", p1.name},
                {"p2", p2.name},
                {"generated", generated},
                {"filtered", filtered}};
    if (list) {
      out["candidates"] = json::array();
      for (const auto& c : kept) {
        json record = to_json(c);
        record["messages"] = json::array();
        for (const auto& m : realize(c, p1, p2).messages)
          record["messages"].push_back({{"sender", m.sender.name},
                                        {"receiver", m.receiver.name},
                                        {"payload", m.payload.str()}});
        out["candidates"].push_back(std::move(record));
      }
    }
    std::cout << out.dump(2) << "\n";
    return kExitClean;
  }

  std::cout << "generated: " << generated << "\n";
  std::cout << "filtered: " << filtered << "\n";
  if (list) {
    for (const auto& c : kept) {
      std::cout << c.index << ":";
      for (const auto& s : c.steps) std::cout << " " << s.str();
      std::cout << "\n";
    }
  }
  return kExitClean;
}

int cmd_compose(const std::string& path1, const std::string& path2, const std::string& outdir,
                const std::string& select, bool no_embed, bool no_auto_rename,
                std::uint64_t limit, unsigned jobs, bool show_memory,
                const std::string& format) {
  Protocol p1 = require_spec(path1).protocol;
  Protocol p2 = require_spec(path2).protocol;

  ComposeOptions options;
  options.auto_rename = !no_auto_rename;
  options.embed = !no_embed;
  options.limit = limit;
  options.jobs = jobs;
  ComposeSummary summary = compose_all(p1, p2, options);

  std::optional<std::size_t> selected = summary.selected;
  if (select == "first") {
    selected.reset();
    for (std::size_t k = 0; k < summary.results.size(); ++k) {
      if (summary.results[k].accepted) {
        selected = k;
        break;
      }
    }
  }

  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) {
    std::cerr << red("error") << ": cannot create " << outdir << "\n";
    return kExitUsage;
  }
  for (const auto& r : summary.results) {
    if (!r.accepted) continue;
    std::ofstream spec(fs::path(outdir) / (r.realized.name + ".spc"), std::ios::binary);
    spec << serialize_protocol(r.realized);
    std::ofstream record(fs::path(outdir) / (r.realized.name + ".json"), std::ios::binary);
    record << to_json(r, show_memory).dump(2) << "\n";
  }
  json summary_doc = summary_json(summary);
  if (selected) {
    const auto& sel = summary.results[*selected];
    summary_doc["selected"] = {{"candidate", sel.candidate.index},
                               {"messages", sel.realized.messages.size()},
                               {"file", sel.realized.name + ".spc"}};
  }
  {
    std::ofstream out(fs::path(outdir) / "summary.json", std::ios::binary);
    out << summary_doc.dump(2) << "\n";
  }

  if (format == "json") {
    std::cout << summary_doc.dump(2) << "\n";
  } else {
    for (const auto& [old, fresh] : summary.renames.renamed)
      std::cout << "renamed: " << old.name << " -> " << fresh.name << "\n";
    std::cout << "generated: " << summary.generated << "\n";
    std::cout << "filtered: " << summary.filtered << "\n";
    std::cout << "accepted: " << summary.accepted << "\n";
    if (selected) {
      const auto& sel = summary.results[*selected];
      std::cout << "selected: candidate " << sel.candidate.index << " with "
                << sel.realized.messages.size() << " messages -> " << sel.realized.name
                << ".spc\n";
    }
    std::cout << "wrote " << summary.accepted << " protocols to " << outdir << "\n";
  }
  return summary.accepted > 0 ? kExitClean : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strand space toolkit for term-based protocol composition"};
  app.require_subcommand(1);

  std::string format = "text";
  app.add_option("--format", format, "output format")->check(CLI::IsMember({"text", "json"}));

  std::string parse_file;
  auto* parse_cmd = app.add_subcommand("parse", "parse and validate a protocol file");
  parse_cmd->add_option("file", parse_file)->required();

  std::string check1, check2;
  bool auto_rename = false;
  auto* check_cmd = app.add_subcommand("check", "run the independence checks on two protocols");
  check_cmd->add_option("file1", check1)->required();
  check_cmd->add_option("file2", check2)->required();
  check_cmd->add_flag("--auto-rename", auto_rename, "freshen conflicting names before checking");

  std::string conn_file, conn_kind = "all";
  auto* conn_cmd = app.add_subcommand("connections", "list term connections of a protocol");
  conn_cmd->add_option("file", conn_file)->required();
  conn_cmd->add_option("--kind", conn_kind)->check(CLI::IsMember({"all", "partial", "complete"}));

  std::string gen1, gen2;
  bool gen_list = false;
  std::uint64_t gen_limit = 0;
  auto* gen_cmd = app.add_subcommand("generate", "enumerate parallel composition candidates");
  gen_cmd->add_option("file1", gen1)->required();
  gen_cmd->add_option("file2", gen2)->required();
  gen_cmd->add_flag("--list", gen_list, "list the filtered candidates");
  gen_cmd->add_option("--limit", gen_limit, "truncate the listing");

  std::string comp1, comp2, outdir = "out", select = "min-messages";
  bool no_embed = false, no_auto_rename = false, show_memory = false;
  std::uint64_t comp_limit = 0;
  unsigned jobs = 1;
  auto* comp_cmd = app.add_subcommand("compose", "compose two protocols end to end");
  comp_cmd->add_option("file1", comp1)->required();
  comp_cmd->add_option("file2", comp2)->required();
  comp_cmd->add_option("--out", outdir, "output directory");
  comp_cmd->add_option("--select", select)->check(CLI::IsMember({"min-messages", "first"}));
  comp_cmd->add_flag("--no-embed", no_embed, "pair terms instead of embedding");
  comp_cmd->add_flag("--no-auto-rename", no_auto_rename, "skip conflict renaming");
  comp_cmd->add_option("--limit", comp_limit, "compose at most this many candidates");
  comp_cmd->add_option("--jobs", jobs, "worker threads");
  comp_cmd->add_flag("--show-memory", show_memory, "include memory strands in JSON records");

  // lets --format appear after the subcommand as well
  for (auto* sub : {parse_cmd, check_cmd, conn_cmd, gen_cmd, comp_cmd}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitClean : kExitUsage;
  }

  try {
    if (parse_cmd->parsed()) return cmd_parse(parse_file, format);
    if (check_cmd->parsed()) return cmd_check(check1, check2, auto_rename, format);
    if (conn_cmd->parsed()) return cmd_connections(conn_file, conn_kind, format);
    if (gen_cmd->parsed()) return cmd_generate(gen1, gen2, gen_list, gen_limit, format);
    if (comp_cmd->parsed())
      return cmd_compose(comp1, comp2, outdir, select, no_embed, no_auto_rename, comp_limit,
                         jobs, show_memory, format);
  } catch (const std::exception& e) {
    std::cerr << red("error") << ": " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
