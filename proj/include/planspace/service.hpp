#pragma once

#include "planspace/query_text.hpp"
#include "planspace/reasoning.hpp"
#include "planspace/session.hpp"
#include "planspace/task_json.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace planspace {

struct ServiceOptions {
  PlanSpaceOptions space;
  SessionOptions session;
  std::size_t max_compile_jobs = 2;
  std::chrono::seconds session_idle{3600};
  std::size_t max_samples = 10000;
  std::string cors_origin = "*";
};

struct HttpResponse {
  int status = 200;
  json body;
};

// HTTP-independent request handling, so tests can drive it directly; serve()
// and install() put it behind cpp-httplib.
class Service {
 public:
  using Clock = std::chrono::steady_clock;

  explicit Service(ServiceOptions opts = {})
      : opts_(std::move(opts)), jobs_(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, opts_.max_compile_jobs))) {}

  // For tests: replaces the clock used for idle eviction.
  void set_clock(std::function<Clock::time_point()> now) { now_ = std::move(now); }

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
      evict_idle();
      return route(method, split(path), body);
    } catch (const NotFound& e) {
      return error(404, e.what());
    } catch (const MalformedRequest& e) {
      return error(422, e.what());
    } catch (const json::exception& e) {
      return error(422, std::string("malformed JSON: ") + e.what());
    } catch (const QueryError& e) {
      return error(422, e.what());
    } catch (const ConfigError& e) {
      return error(422, e.what());
    } catch (const StructuralError& e) {
      return error(422, e.what());
    } catch (const TaskFormatError& e) {
      return error(422, e.what());
    } catch (const UndefinedSignificance& e) {
      return error(422, e.what());
    } catch (const BudgetExceeded& e) {
      return error(503, e.what());
    } catch (const NoModelsError& e) {
      return error(409, e.what());
    } catch (const std::exception& e) {
      return error(500, e.what());
    }
  }

  void install(httplib::Server& srv) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
      HttpResponse r = handle(req.method, req.path, req.body);
      res.status = r.status;
      cors(res);
      if (!r.body.is_null()) res.set_content(r.body.dump(), "application/json");
    };
    srv.Get(".*", forward);
    srv.Post(".*", forward);
    srv.Delete(".*", forward);
    srv.Options(".*", [this](const httplib::Request&, httplib::Response& res) {
      res.status = 204;
      cors(res);
    });
  }

  std::size_t num_sessions() const {
    std::shared_lock lock(mu_);
    return sessions_.size();
  }
  std::size_t num_cached_spaces() const {
    std::shared_lock lock(mu_);
    return cache_.size();
  }
  std::size_t compilations() const {
    std::shared_lock lock(mu_);
    return compilations_;
  }

 private:
  class NotFound : public Error {
   public:
    using Error::Error;
  };

  struct TaskEntry {
    std::shared_ptr<const PlanningTask> task;
    std::string digest;
    std::string canonical;
  };

  struct CacheEntry {
    std::string canonical;
    std::shared_future<std::shared_ptr<const PlanSpace>> space;
  };

  struct SessionEntry {
    std::mutex mu;
    std::unique_ptr<NavSession> nav;
    Clock::time_point last_access;
  };

  static HttpResponse error(int status, const std::string& msg) {
    return {status, json{{"error", msg}}};
  }

  void cors(httplib::Response& res) const {
    res.set_header("Access-Control-Allow-Origin", opts_.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  }

  static std::vector<std::string> split(const std::string& path) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size()) {
      std::size_t j = path.find('/', i);
      if (j == std::string::npos) j = path.size();
      if (j > i) out.push_back(path.substr(i, j - i));
      i = j + 1;
    }
    return out;
  }

  static json parse_body(const std::string& body) {
    if (body.empty()) return json::object();
    json j = json::parse(body);
    if (!j.is_object()) throw MalformedRequest("request body must be a JSON object");
    return j;
  }

  Clock::time_point now() const { return now_ ? now_() : Clock::now(); }

  std::string fresh_id() {
    std::lock_guard lock(rng_mu_);
    char buf[33];
    for (int i = 0; i < 4; ++i) std::snprintf(buf + 8 * i, 9, "%08x", static_cast<unsigned>(rd_()));
    return std::string(buf, 32);
  }

  HttpResponse route(const std::string& method, const std::vector<std::string>& seg,
                     const std::string& body) {
    const std::size_t n = seg.size();
    if (method == "POST" && n == 1 && seg[0] == "tasks") return post_task(body);
    if (method == "POST" && n == 3 && seg[0] == "tasks" && seg[2] == "spaces")
      return post_space(seg[1], body);
    if (n >= 2 && seg[0] == "spaces") {
      if (method == "GET" && n == 2) return get_space(seg[1]);
      if (method == "POST" && n == 3 && seg[2] == "prob") return post_prob(seg[1], body);
      if (method == "POST" && n == 3 && seg[2] == "sample") return post_sample(seg[1], body);
      if (method == "POST" && n == 3 && seg[2] == "sessions") return post_session(seg[1], body);
    }
    if (n >= 2 && seg[0] == "sessions") {
      if (method == "GET" && n == 2) return get_session(seg[1]);
      if (method == "POST" && n == 3 && seg[2] == "commit") return post_commit(seg[1], body);
      if (method == "POST" && n == 3 && seg[2] == "undo") return post_undo(seg[1]);
      if (method == "DELETE" && n == 2) return delete_session(seg[1]);
    }
    throw NotFound("no route for " + method + " /" + join(seg));
  }

  static std::string join(const std::vector<std::string>& seg) {
    std::string s;
    for (std::size_t i = 0; i < seg.size(); ++i) s += (i ? "/" : "") + seg[i];
    return s;
  }

  // --- tasks and spaces ----------------------------------------------------

  HttpResponse post_task(const std::string& body) {
    json j = json::parse(body.empty() ? "null" : body);
    if (j.is_object() && j.contains("task")) j = j["task"];
    auto task = std::make_shared<const PlanningTask>(task_from_json(j));
    TaskEntry e{task, task_digest(*task), task_to_json(*task).dump()};
    const std::string id = fresh_id();
    {
      std::unique_lock lock(mu_);
      tasks_.emplace(id, std::move(e));
    }
    return {201, json{{"task_id", id}}};
  }

  TaskEntry find_task(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = tasks_.find(id);
    if (it == tasks_.end()) throw NotFound("unknown task '" + id + "'");
    return it->second;
  }

  std::shared_ptr<const PlanSpace> find_space(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = spaces_.find(id);
    if (it == spaces_.end()) throw NotFound("unknown space '" + id + "'");
    return it->second;
  }

  // One compilation per (task, length); concurrent requests for the same key
  // wait on the same future.
  std::shared_ptr<const PlanSpace> plan_space(const TaskEntry& t, std::size_t length) {
    t.task->check_bound({length}, opts_.space.cap_factor);
    const std::string key = t.digest + "/" + std::to_string(length);
    std::promise<std::shared_ptr<const PlanSpace>> promise;
    std::shared_future<std::shared_ptr<const PlanSpace>> fut;
    {
      std::unique_lock lock(mu_);
      auto it = cache_.find(key);
      if (it != cache_.end() && it->second.canonical == t.canonical) {
        fut = it->second.space;
      } else {
        fut = promise.get_future().share();
        cache_[key] = {t.canonical, fut};
        ++compilations_;
        lock.unlock();
        jobs_.acquire();
        try {
          promise.set_value(build_plan_space(*t.task, {length}, opts_.space));
        } catch (...) {
          promise.set_exception(std::current_exception());
          std::unique_lock relock(mu_);
          cache_.erase(key);
        }
        jobs_.release();
      }
    }
    return fut.get();
  }

  HttpResponse post_space(const std::string& task_id, const std::string& body) {
    const TaskEntry t = find_task(task_id);
    const json j = parse_body(body);
    if (!j.contains("length") || !j["length"].is_number_integer() || j["length"].get<long long>() < 0)
      throw MalformedRequest("body needs a non-negative integer 'length'");
    auto space = plan_space(t, j["length"].get<std::size_t>());
    const std::string id = fresh_id();
    {
      std::unique_lock lock(mu_);
      spaces_.emplace(id, space);
    }
    return {201, json{{"space_id", id}, {"count", space->count().str()}, {"length", space->bound().value}}};
  }

  HttpResponse get_space(const std::string& id) {
    auto space = find_space(id);
    const PlanView v(space);
    const PlanningTask& t = space->task();
    json facets = json::array();
    for (const Facet& f : v.facets().all()) facets.push_back(facet_row_to_json({f, v.significance(f)}, t));
    return {200, json{{"count", v.count().str()},
                      {"length", space->bound().value},
                      {"brave", t.operator_names(v.brave())},
                      {"cautious", t.operator_names(v.cautious())},
                      {"facets", facets}}};
  }

  HttpResponse post_prob(const std::string& id, const std::string& body) {
    auto space = find_space(id);
    const json j = parse_body(body);
    if (!j.contains("query") || !j["query"].is_string())
      throw MalformedRequest("body needs a string 'query'");
    const Query q = parse_query(j["query"].get<std::string>(), space->task());
    const PlanView v(space);
    const BigInt sat = v.query_count(q);
    json out = probability_to_json(Probability::of(sat, v.count()));
    out["count"] = sat.str();
    return {200, out};
  }

  HttpResponse post_sample(const std::string& id, const std::string& body) {
    auto space = find_space(id);
    const json j = parse_body(body);
    std::size_t n = 1;
    std::uint64_t seed = 0;
    if (j.contains("n")) {
      if (!j["n"].is_number_integer() || j["n"].get<long long>() < 0)
        throw MalformedRequest("'n' must be a non-negative integer");
      n = j["n"].get<std::size_t>();
    }
    if (n > opts_.max_samples)
      throw MalformedRequest("'n' exceeds the limit of " + std::to_string(opts_.max_samples));
    if (j.contains("seed")) {
      if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
        throw MalformedRequest("'seed' must be a non-negative integer");
      seed = j["seed"].get<std::uint64_t>();
    }
    json plans = json::array();
    for (const auto& p : PlanView(space).sample_plans(n, seed)) plans.push_back(plan_to_json(p, space->task()));
    return {200, json{{"plans", plans}}};
  }

  // --- sessions --------------------------------------------------------------

  HttpResponse post_session(const std::string& space_id, const std::string& body) {
    auto space = find_space(space_id);
    const json j = parse_body(body);
    SessionOptions so = opts_.session;
    if (j.contains("samples")) {
      if (!j["samples"].is_number_integer() || j["samples"].get<long long>() < 0 ||
          j["samples"].get<std::size_t>() > opts_.max_samples)
        throw MalformedRequest("'samples' must be a non-negative integer within the limit");
      so.sample_count = j["samples"].get<std::size_t>();
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
        throw MalformedRequest("'seed' must be a non-negative integer");
      so.seed = j["seed"].get<std::uint64_t>();
    }
    const std::string id = fresh_id();
    auto entry = std::make_shared<SessionEntry>();
    entry->nav = std::make_unique<NavSession>(space, so, id);
    entry->last_access = now();
    json snap = snapshot_to_json(entry->nav->snapshot(), space->task());
    {
      std::unique_lock lock(mu_);
      sessions_.emplace(id, std::move(entry));
    }
    return {201, json{{"session_id", id}, {"snapshot", snap}}};
  }

  std::shared_ptr<SessionEntry> find_session(const std::string& id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
    return it->second;
  }

  HttpResponse get_session(const std::string& id) {
    auto s = find_session(id);
    std::lock_guard lock(s->mu);
    s->last_access = now();
    return {200, snapshot_to_json(s->nav->snapshot(), s->nav->space().task())};
  }

  HttpResponse post_commit(const std::string& id, const std::string& body) {
    auto s = find_session(id);
    json j = parse_body(body);
    if (j.contains("commitment")) j = j["commitment"];
    std::lock_guard lock(s->mu);
    s->last_access = now();
    const PlanningTask& t = s->nav->space().task();
    const Commitment c = commitment_from_json(j, t);
    try {
      return {200, snapshot_to_json(s->nav->commit(c), t)};
    } catch (const CommitmentError& e) {
      return {409, json{{"error", e.what()}, {"commitment", commitment_to_json(e.commitment(), t)}}};
    }
  }

  HttpResponse post_undo(const std::string& id) {
    auto s = find_session(id);
    std::lock_guard lock(s->mu);
    s->last_access = now();
    if (s->nav->depth() == 0) return error(409, "nothing to undo");
    return {200, snapshot_to_json(s->nav->undo(), s->nav->space().task())};
  }

  HttpResponse delete_session(const std::string& id) {
    std::unique_lock lock(mu_);
    if (sessions_.erase(id) == 0) throw NotFound("unknown session '" + id + "'");
    return {204, nullptr};
  }

  void evict_idle() {
    const auto t = now();
    std::unique_lock lock(mu_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      std::unique_lock s(it->second->mu, std::try_to_lock);
      if (s.owns_lock() && t - it->second->last_access > opts_.session_idle) {
        s.unlock();
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }

  ServiceOptions opts_;
  std::function<Clock::time_point()> now_;
  std::counting_semaphore<1024> jobs_;

  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, TaskEntry> tasks_;
  std::unordered_map<std::string, std::shared_ptr<const PlanSpace>> spaces_;
  std::unordered_map<std::string, CacheEntry> cache_;
  std::unordered_map<std::string, std::shared_ptr<SessionEntry>> sessions_;
  std::size_t compilations_ = 0;

  std::mutex rng_mu_;
  std::random_device rd_;
};

// Blocks until the server stops.
// Port 0 picks a free port. `on_ready` receives the bound port once the
// socket accepts connections.
inline bool serve(Service& service, const std::string& host, int port,
                  const std::function<void(int)>& on_ready = {}) {
  httplib::Server srv;
  service.install(srv);
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound < 0) return false;
  if (on_ready) on_ready(bound);
  return srv.listen_after_bind();
}

}  // namespace planspace
