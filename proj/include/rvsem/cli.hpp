#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rvsem/errors.hpp"
#include "rvsem/format.hpp"
#include "rvsem/lexicon.hpp"
#include "rvsem/noise.hpp"
#include "rvsem/query.hpp"
#include "rvsem/server.hpp"
#include "rvsem/space.hpp"
#include "rvsem/store.hpp"

namespace rvsem::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kCorruption = 3 };

struct CommandInfo {
  std::string name;
  std::vector<std::string> operations;  // library operations the command reaches
};

/// Dispatch table: every subcommand and the library operations behind it.
inline const std::vector<CommandInfo>& command_table() {
  static const std::vector<CommandInfo> table{
      {"build", {"lexicon.parse_cliques", "seedgen.make_seed", "space.build_space", "space.weight",
                 "space.build_clique_vector", "space.build_term_vector", "space.save"}},
      {"rebuild", {"space.load", "space.build_space", "space.save"}},
      {"add-clique", {"space.load", "space.add_clique", "space.save"}},
      {"neighbors", {"space.load", "query.neighbors", "query.orthogonalize"}},
      {"clusters", {"space.load", "query.clusters", "query.orthogonalize"}},
      {"similarity", {"space.load", "query.similarity", "query.distance"}},
      {"separation", {"lexicon.parse_cliques", "lexicon.degree_of_separation", "lexicon.overlap_similarity",
                      "lexicon.neighborhood"}},
      {"noise", {"seedgen.n_seed", "seedgen.p_overlap", "seedgen.p_scalar", "seedgen.seed_dot",
                 "noise.theoretical_pmf", "noise.sample_seed_noise", "noise.compare"}},
      {"noise tail", {"space.load", "noise.tail_noise"}},
      {"noise pmf", {"seedgen.n_seed", "seedgen.p_overlap", "seedgen.p_scalar", "noise.theoretical_pmf"}},
      {"lexicon-stats", {"lexicon.parse_cliques", "lexicon.neighborhood"}},
      {"serve", {"space.load", "server.session"}},
  };
  return table;
}

namespace cli_detail {

inline Lexicon read_lexicon(const std::string& path, std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open clique file: " + path);
  auto lex = parse_cliques(in);
  for (const auto& w : lex.warnings()) err << fmt::format("{}:{}: warning: {}\n", path, w.line, w.message);
  return lex;
}

// Lexicon from a store when given, else from a clique file.
inline Lexicon lexicon_from(const std::string& store, const std::string& cliques, std::ostream& err) {
  if (!store.empty()) return load_space(store).lexicon();
  if (!cliques.empty()) return read_lexicon(cliques, err);
  throw DomainError("one of --space or --cliques is required");
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(sep, start);
    if (end == std::string_view::npos) end = s.size();
    const auto item = detail::trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

inline void write_fields(std::ostream& out, OutputFormat fmt, const Json& j) {
  if (fmt == OutputFormat::json) {
    out << j.dump() << '\n';
    return;
  }
  if (fmt == OutputFormat::csv) {
    out << "key,value\n";
    for (const auto& [k, v] : j.items()) out << k << ',' << csv_field(v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
    return;
  }
  for (const auto& [k, v] : j.items()) out << k << ' ' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
}

inline Json store_summary(const SemanticSpace& space) {
  return {{"n_terms", space.n_terms()},
          {"n_cliques", space.lexicon().n_cliques()},
          {"d", space.dim()},
          {"m", space.config().m},
          {"global_seed", space.config().global_seed},
          {"weighting", std::string(to_string(space.config().weighting))},
          {"degenerate", space.degenerate_terms().size()},
          {"checksum", store_checksum(space)}};
}

inline SampleMode parse_mode(std::string_view s) {
  if (s == "seed") return SampleMode::seed;
  if (s == "composite") return SampleMode::composite;
  throw DomainError("unknown noise mode: " + std::string(s));
}

}  // namespace cli_detail

/// Runs one command line (program name excluded). Output goes to `out`,
/// diagnostics to `err`; the return value is the process exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Random-indexing semantic space toolkit", "rvsem"};
  app.require_subcommand(1);
  std::function<void()> action;
  std::string format_name = "table";
  auto add_format = [&](CLI::App* c) {
    c->add_option("--format", format_name, "table|json|csv")->check(CLI::IsMember({"table", "json", "csv"}));
  };

  std::string cliques_path, store_path, out_path, term, a, b, terms_arg, minus_arg, weighting = "tf-idf";
  std::string mode = "seed", host = "127.0.0.1";
  SpaceConfig cfg;
  std::size_t k = 10, members = ClusterOptions{}.members, start = 10000, count = 40000;
  std::uint64_t samples = 1000000, rng_seed = 0;
  unsigned threads = 0;
  int port = 8080;
  double merge_threshold = ClusterOptions{}.merge_threshold;
  bool renormalize = false;

  auto* build = app.add_subcommand("build", "Build a space from a clique file");
  build->add_option("--cliques", cliques_path)->required();
  build->add_option("--dim", cfg.dim);
  build->add_option("--m", cfg.m);
  build->add_option("--seed", cfg.global_seed);
  build->add_option("--weighting", weighting)->check(CLI::IsMember({"tf-idf", "uniform"}));
  build->add_option("--out", out_path)->required();
  add_format(build);
  build->callback([&] {
    action = [&] {
      cfg.weighting = parse_weighting(weighting);
      BuildReport report;
      auto space = build_space(read_lexicon(cliques_path, err), cfg, &report);
      save_space(space, out_path);
      auto j = store_summary(space);
      j["salt_repairs"] = report.salt_repairs;
      write_fields(out, parse_format(format_name), j);
    };
  });

  auto* rebuild = app.add_subcommand("rebuild", "Recompute idf weights and every vector of a store");
  rebuild->add_option("--space", store_path)->required();
  rebuild->add_option("--out", out_path, "defaults to --space");
  add_format(rebuild);
  rebuild->callback([&] {
    action = [&] {
      auto space = load_space(store_path);
      space.reweight();
      save_space(space, out_path.empty() ? store_path : out_path);
      write_fields(out, parse_format(format_name), store_summary(space));
    };
  });

  auto* add = app.add_subcommand("add-clique", "Insert a clique with a local update");
  add->add_option("--space", store_path)->required();
  add->add_option("--terms", terms_arg, "a;b;c")->required();
  add->add_option("--out", out_path, "defaults to --space");
  add_format(add);
  add->callback([&] {
    action = [&] {
      auto space = load_space(store_path);
      const auto report = space.add_clique(split(terms_arg, ';'));
      save_space(space, out_path.empty() ? store_path : out_path);
      Json j{{"clique", report.clique},
             {"new_terms", server_detail::term_names(space, report.new_terms)},
             {"touched_terms", server_detail::term_names(space, report.touched)},
             {"checksum", store_checksum(space)}};
      write_fields(out, parse_format(format_name), j);
    };
  });

  auto* nb = app.add_subcommand("neighbors", "Nearest terms, optionally after sense subtraction");
  nb->add_option("--space", store_path)->required();
  nb->add_option("--term", term)->required();
  nb->add_option("--k", k);
  nb->add_option("--minus", minus_arg, "t1,t2,...");
  nb->add_flag("--renormalize", renormalize);
  add_format(nb);
  nb->callback([&] {
    action = [&] {
      const auto space = load_space(store_path);
      NeighborOptions opts;
      opts.renormalize = renormalize;
      write_neighbors(out, neighbors(space, term, k, split(minus_arg, ','), opts), parse_format(format_name));
    };
  });

  auto* cl = app.add_subcommand("clusters", "Clique-seeded clusters of a term's neighborhood");
  cl->add_option("--space", store_path)->required();
  cl->add_option("--term", term)->required();
  cl->add_option("--minus", minus_arg, "t1,t2,...");
  cl->add_option("--merge-threshold", merge_threshold);
  cl->add_option("--members", members);
  add_format(cl);
  cl->callback([&] {
    action = [&] {
      const auto space = load_space(store_path);
      ClusterOptions opts{merge_threshold, members};
      write_clusters(out, clusters(space, term, split(minus_arg, ','), opts), parse_format(format_name));
    };
  });

  auto* sim = app.add_subcommand("similarity", "Similarity and distance of two terms");
  sim->add_option("--space", store_path)->required();
  sim->add_option("--a", a)->required();
  sim->add_option("--b", b)->required();
  add_format(sim);
  sim->callback([&] {
    action = [&] {
      const auto space = load_space(store_path);
      const double s = similarity(space, a, b);
      const auto fmt = parse_format(format_name);
      if (fmt == OutputFormat::table) {
        out << fmt::format("{:.3f} {:.3f}\n", s, distance(s));
      } else {
        write_fields(out, fmt, Json{{"a", a}, {"b", b}, {"similarity", s}, {"distance", distance(s)}});
      }
    };
  });

  auto* sep = app.add_subcommand("separation", "Degree of separation and overlap of two terms");
  sep->add_option("--space", store_path);
  sep->add_option("--cliques", cliques_path);
  sep->add_option("--a", a)->required();
  sep->add_option("--b", b)->required();
  add_format(sep);
  sep->callback([&] {
    action = [&] {
      const auto lex = lexicon_from(store_path, cliques_path, err);
      const auto ia = lex.id_of(a), ib = lex.id_of(b);
      const auto hops = lex.degree_of_separation(ia, ib);
      Json j{{"a", a}, {"b", b}, {"separation", hops ? Json(*hops) : Json(nullptr)}, {"reachable", hops.has_value()},
             {"overlap", lex.overlap_similarity(ia, ib)}, {"diameter_a", lex.diameter(ia)},
             {"diameter_b", lex.diameter(ib)}};
      const auto fmt = parse_format(format_name);
      if (fmt == OutputFormat::table) {
        out << (hops ? std::to_string(*hops) : std::string("unreachable")) << '\n';
      } else {
        write_fields(out, fmt, j);
      }
    };
  });

  auto* noise = app.add_subcommand("noise", "Seed scalar-product noise: theory against sampling");
  noise->require_subcommand(0, 1);
  noise->add_option("--dim", cfg.dim);
  noise->add_option("--m", cfg.m);
  noise->add_option("--mode", mode)->check(CLI::IsMember({"seed", "composite"}));
  noise->add_option("--samples", samples);
  noise->add_option("--rng-seed", rng_seed);
  noise->add_option("--threads", threads, "0 = all cores; output does not depend on it");
  noise->add_option("--out", out_path, "CSV of the theoretical and empirical distributions");
  noise->callback([&] {
    if (!noise->get_subcommands().empty()) return;
    action = [&] {
      const auto r = noise_report(cfg.dim, cfg.m, parse_mode(mode), samples, rng_seed, threads);
      if (!out_path.empty()) {
        std::ofstream csv(out_path, std::ios::binary | std::ios::trunc);
        if (!csv) throw IoError("cannot open for writing: " + out_path);
        write_noise_csv(csv, r);
      }
      out << to_json(r).dump() << '\n';
    };
  });

  auto* pmf = noise->add_subcommand("pmf", "Exact seed counts and scalar-product distribution");
  pmf->add_option("--dim", cfg.dim);
  pmf->add_option("--m", cfg.m);
  pmf->callback([&] { action = [&] { out << to_json(theoretical_pmf(cfg.dim, cfg.m)).dump() << '\n'; }; });

  auto* tail = noise->add_subcommand("tail", "Similarity histogram over a range of a term's neighbor ranks");
  tail->add_option("--space", store_path)->required();
  tail->add_option("--term", term)->required();
  tail->add_option("--start", start, "first rank; rank 0 is the term itself");
  tail->add_option("--count", count);
  tail->add_option("--out", out_path, "CSV histogram");
  tail->callback([&] {
    action = [&] {
      const auto space = load_space(store_path);
      const auto h = tail_noise(space, space.lexicon().id_of(term), start, count);
      if (!out_path.empty()) {
        std::ofstream csv(out_path, std::ios::binary | std::ios::trunc);
        if (!csv) throw IoError("cannot open for writing: " + out_path);
        write_histogram_csv(csv, h);
      }
      out << Json{{"term", term}, {"start", start}, {"count", count}, {"sample_count", h.total},
                  {"mean", h.mean()}, {"std", h.stddev()}, {"reference_gaussian_std", kReferenceNoiseStd}}
                 .dump()
          << '\n';
    };
  });

  auto* stats = app.add_subcommand("lexicon-stats", "Term, clique and diameter counts of a clique file");
  stats->add_option("--cliques", cliques_path)->required();
  add_format(stats);
  stats->callback([&] {
    action = [&] { write_fields(out, parse_format(format_name), to_json(lexicon_stats(read_lexicon(cliques_path, err)))); };
  });

  auto* serve = app.add_subcommand("serve", "HTTP JSON API over a store");
  serve->add_option("--space", store_path)->required();
  serve->add_option("--port", port);
  serve->add_option("--host", host);
  serve->callback([&] {
    action = [&] {
      ApiSession session(load_space(store_path), store_path);
      httplib::Server server;
      mount(server, session);
      err << fmt::format("serving {} on http://{}:{}\n", store_path, host, port);
      if (!server.listen(host, port)) throw IoError(fmt::format("cannot listen on {}:{}", host, port));
    };
  });

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  try {
    if (action) action();
    return kOk;
  } catch (const CorruptionError& e) {
    err << "error: " << e.what() << '\n';
    return kCorruption;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace rvsem::cli
