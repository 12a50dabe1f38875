#pragma once

// JSON-over-HTTP facade. Readers work on an immutable snapshot; updates
// copy the space, apply the clique and swap the snapshot in one step.

#include <algorithm>
#include <charconv>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>

#include "rvsem/errors.hpp"
#include "rvsem/format.hpp"
#include "rvsem/noise.hpp"
#include "rvsem/query.hpp"
#include "rvsem/space.hpp"
#include "rvsem/store.hpp"

namespace rvsem {

inline constexpr std::size_t kMaxTermLimit = 1000;
inline constexpr std::size_t kDefaultTermLimit = 100;
inline constexpr std::size_t kDefaultNeighborCount = 10;

struct Snapshot {
  std::shared_ptr<const SemanticSpace> space;
  std::string checksum;
  std::vector<TermId> by_name;  // term ids in lexicographic order of their strings
};

struct ApiResponse {
  int status = 200;
  Json body;
};

using ApiParams = std::map<std::string, std::string, std::less<>>;

/// Malformed request parameter (HTTP 400).
class BadRequest : public Error {
 public:
  using Error::Error;
};

namespace server_detail {

inline std::shared_ptr<const Snapshot> make_snapshot(std::shared_ptr<const SemanticSpace> space) {
  auto snap = std::make_shared<Snapshot>();
  snap->checksum = store_checksum(*space);
  const auto& terms = space->lexicon().terms();
  snap->by_name.resize(terms.size());
  for (TermId t = 0; t < terms.size(); ++t) snap->by_name[t] = t;
  std::sort(snap->by_name.begin(), snap->by_name.end(), [&](TermId a, TermId b) { return terms[a] < terms[b]; });
  snap->space = std::move(space);
  return snap;
}

inline std::optional<std::string_view> param(const ApiParams& p, std::string_view key) {
  const auto it = p.find(key);
  if (it == p.end()) return std::nullopt;
  return std::string_view(it->second);
}

inline std::string required(const ApiParams& p, std::string_view key) {
  const auto v = param(p, key);
  if (!v || v->empty()) throw BadRequest("missing parameter: " + std::string(key));
  return std::string(*v);
}

template <class T>
T number(const ApiParams& p, std::string_view key, T fallback) {
  const auto v = param(p, key);
  if (!v || v->empty()) return fallback;
  T out{};
  const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || end != v->data() + v->size()) {
    throw BadRequest("invalid value for " + std::string(key) + ": " + std::string(*v));
  }
  return out;
}

inline double real(const ApiParams& p, std::string_view key, double fallback) {
  const auto v = param(p, key);
  if (!v || v->empty()) return fallback;
  try {
    std::size_t used = 0;
    const double x = std::stod(std::string(*v), &used);
    if (used == v->size() && std::isfinite(x)) return x;
  } catch (const std::exception&) {
  }
  throw BadRequest("invalid value for " + std::string(key) + ": " + std::string(*v));
}

inline bool flag(const ApiParams& p, std::string_view key) {
  const auto v = param(p, key);
  if (!v || v->empty() || *v == "0" || *v == "false") return false;
  if (*v == "1" || *v == "true") return true;
  throw BadRequest("invalid value for " + std::string(key) + ": " + std::string(*v));
}

// Comma-separated list; blanks around items and empty items are dropped.
inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto end = s.find(',', start);
    if (end == std::string_view::npos) end = s.size();
    const auto item = detail::trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

inline std::vector<std::string> term_names(const SemanticSpace& space, const std::vector<TermId>& ids) {
  std::vector<std::string> out;
  for (TermId t : ids) out.push_back(space.lexicon().term(t));
  return out;
}

}  // namespace server_detail

/// Serves queries against the current snapshot and serializes updates.
class ApiSession {
 public:
  class UpdateGuard {
   public:
    explicit UpdateGuard(std::unique_lock<std::mutex> lock) : lock_(std::move(lock)) {}

   private:
    std::unique_lock<std::mutex> lock_;
  };

  explicit ApiSession(SemanticSpace space, std::string store_path = {})
      : store_path_(std::move(store_path)),
        current_(server_detail::make_snapshot(std::make_shared<const SemanticSpace>(std::move(space)))) {}

  std::shared_ptr<const Snapshot> snapshot() const {
    std::lock_guard lock(swap_mutex_);
    return current_;
  }

  const std::string& store_path() const noexcept { return store_path_; }

  /// Claims the single writer slot, or nothing when an update is in flight.
  std::optional<UpdateGuard> try_begin_update() {
    std::unique_lock lock(update_mutex_, std::try_to_lock);
    if (!lock.owns_lock()) return std::nullopt;
    return UpdateGuard(std::move(lock));
  }

  ApiResponse terms(const ApiParams& p) const {
    return handle([&](const Snapshot& snap) {
      const auto prefix = std::string(server_detail::param(p, "prefix").value_or(""));
      const auto limit = server_detail::number<std::size_t>(p, "limit", kDefaultTermLimit);
      if (limit > kMaxTermLimit) throw BadRequest("limit must be <= " + std::to_string(kMaxTermLimit));
      const auto& names = snap.space->lexicon().terms();
      auto it = std::lower_bound(snap.by_name.begin(), snap.by_name.end(), prefix,
                                 [&](TermId t, const std::string& key) { return names[t] < key; });
      Json list = Json::array();
      for (; it != snap.by_name.end() && list.size() < limit && names[*it].starts_with(prefix); ++it) {
        list.push_back(names[*it]);
      }
      return Json{{"prefix", prefix}, {"limit", limit}, {"terms", std::move(list)}};
    });
  }

  ApiResponse neighbors(const ApiParams& p) const {
    return handle([&](const Snapshot& snap) {
      const auto term = server_detail::required(p, "term");
      const auto k = server_detail::number<std::size_t>(p, "k", kDefaultNeighborCount);
      if (k == 0) throw BadRequest("k must be >= 1");
      const auto minus = server_detail::split_list(server_detail::param(p, "minus").value_or(""));
      NeighborOptions opts;
      opts.renormalize = server_detail::flag(p, "renormalize");
      return to_json(rvsem::neighbors(*snap.space, term, k, minus, opts));
    });
  }

  ApiResponse clusters(const ApiParams& p) const {
    return handle([&](const Snapshot& snap) {
      const auto term = server_detail::required(p, "term");
      const auto minus = server_detail::split_list(server_detail::param(p, "minus").value_or(""));
      ClusterOptions opts;
      opts.merge_threshold = server_detail::real(p, "merge_threshold", opts.merge_threshold);
      opts.members = server_detail::number<std::size_t>(p, "members", opts.members);
      if (opts.members == 0) throw BadRequest("members must be >= 1");
      return to_json(rvsem::clusters(*snap.space, term, minus, opts));
    });
  }

  ApiResponse similarity(const ApiParams& p) const {
    return handle([&](const Snapshot& snap) {
      const auto a = server_detail::required(p, "a");
      const auto b = server_detail::required(p, "b");
      const double s = rvsem::similarity(*snap.space, a, b);
      return Json{{"a", a}, {"b", b}, {"similarity", s}, {"distance", distance(s)}};
    });
  }

  ApiResponse noise_pmf(const ApiParams& p) const {
    return handle([&](const Snapshot&) {
      const auto d = server_detail::number<std::uint32_t>(p, "d", 0);
      const auto m = server_detail::number<std::uint32_t>(p, "m", 0);
      if (d == 0 || m == 0) throw BadRequest("d and m are required positive integers");
      return to_json(theoretical_pmf(d, m));
    });
  }

  /// Body {"terms": [...]}. Answers 409 while another update holds the writer slot.
  ApiResponse add_clique(std::string_view body) {
    auto guard = try_begin_update();
    if (!guard) return error(409, "another update is in progress", snapshot()->checksum);
    return add_clique(body, *guard);
  }

  ApiResponse add_clique(std::string_view body, const UpdateGuard&) {
    return handle([&](const Snapshot& snap) {
      const auto doc = Json::parse(body, nullptr, false);
      if (doc.is_discarded() || !doc.is_object() || !doc.contains("terms") || !doc["terms"].is_array()) {
        throw BadRequest("body must be a JSON object with a \"terms\" array");
      }
      std::vector<std::string> terms;
      for (const auto& t : doc["terms"]) {
        if (!t.is_string()) throw BadRequest("terms must be strings");
        terms.push_back(t.get<std::string>());
      }
      auto next = std::make_shared<SemanticSpace>(*snap.space);
      const auto report = next->add_clique(terms);
      Json out{{"clique", report.clique},
               {"new_terms", server_detail::term_names(*next, report.new_terms)},
               {"touched_terms", server_detail::term_names(*next, report.touched)},
               {"previous_checksum", snap.checksum}};
      auto fresh = server_detail::make_snapshot(std::move(next));
      {
        std::lock_guard lock(swap_mutex_);
        current_ = fresh;
      }
      out["checksum"] = fresh->checksum;
      return out;
    });
  }

 private:
  static ApiResponse error(int status, const std::string& message, const std::string& checksum) {
    return {status, Json{{"error", message}, {"checksum", checksum}}};
  }

  // Runs f on one snapshot and maps library errors to HTTP statuses.
  template <class F>
  ApiResponse handle(F&& f) const {
    const auto snap = snapshot();
    try {
      Json body = f(*snap);
      if (!body.contains("checksum")) body["checksum"] = snap->checksum;
      return {200, std::move(body)};
    } catch (const BadRequest& e) {
      return error(400, e.what(), snap->checksum);
    } catch (const NotFoundError& e) {
      return error(404, e.what(), snap->checksum);
    } catch (const Error& e) {
      return error(422, e.what(), snap->checksum);
    }
  }

  std::string store_path_;
  mutable std::mutex swap_mutex_;
  std::mutex update_mutex_;
  std::shared_ptr<const Snapshot> current_;
};

namespace server_detail {

inline ApiParams params_of(const httplib::Request& req) {
  ApiParams out;
  for (const auto& [k, v] : req.params) out.emplace(k, v);
  return out;
}

inline void reply(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace server_detail

/// Registers every endpoint on `server`, with permissive CORS for browser clients.
inline void mount(httplib::Server& server, ApiSession& session) {
  using server_detail::params_of;
  using server_detail::reply;
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  server.Get("/terms", [&](const auto& req, auto& res) { reply(res, session.terms(params_of(req))); });
  server.Get("/neighbors", [&](const auto& req, auto& res) { reply(res, session.neighbors(params_of(req))); });
  server.Get("/clusters", [&](const auto& req, auto& res) { reply(res, session.clusters(params_of(req))); });
  server.Get("/similarity", [&](const auto& req, auto& res) { reply(res, session.similarity(params_of(req))); });
  server.Get("/noise/pmf", [&](const auto& req, auto& res) { reply(res, session.noise_pmf(params_of(req))); });
  server.Post("/cliques", [&](const auto& req, auto& res) { reply(res, session.add_clique(req.body)); });
  server.Options(R"(/.*)", [](const auto&, auto& res) { res.status = 204; });
}

}  // namespace rvsem
