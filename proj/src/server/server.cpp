#include "qbc/server/server.hpp"

#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <random>

#include <httplib.h>

#include "qbc/examples/examples.hpp"
#include "qbc/lang/parser.hpp"

namespace qbc {

namespace {

long long now_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string random_suffix() {
  static std::mt19937_64 rng{std::random_device{}()};
  static std::mutex mu;
  std::lock_guard lk(mu);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return std::string(buf, 8);
}

}  // namespace

std::shared_ptr<SessionEntry> SessionStore::add(std::unique_ptr<Session> s, std::string name) {
  auto e = std::make_shared<SessionEntry>();
  e->session = std::move(s);
  e->name = std::move(name);
  e->created = e->updated = now_ms();
  std::lock_guard lk(mu_);
  e->id = "s" + std::to_string(++counter_) + "-" + random_suffix();
  items_[e->id] = e;
  return e;
}

std::shared_ptr<SessionEntry> SessionStore::find(const std::string& id) const {
  std::lock_guard lk(mu_);
  auto it = items_.find(id);
  return it == items_.end() ? nullptr : it->second;
}

bool SessionStore::erase(const std::string& id) {
  std::lock_guard lk(mu_);
  return items_.erase(id) > 0;
}

std::vector<std::shared_ptr<SessionEntry>> SessionStore::all() const {
  std::lock_guard lk(mu_);
  std::vector<std::shared_ptr<SessionEntry>> out;
  for (const auto& [_, e] : items_) out.push_back(e);
  return out;
}

std::size_t SessionStore::snapshot(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::size_t n = 0;
  for (const auto& e : all()) {
    std::shared_lock lk(e->mu);
    Json j;
    j["id"] = e->id;
    j["name"] = e->name;
    j["created"] = e->created;
    j["updated"] = e->updated;
    j["script"] = e->session->export_script();
    std::ofstream f(std::filesystem::path(dir) / (e->id + ".json"));
    f << j.dump(2) << "\n";
    ++n;
  }
  return n;
}

SpecDef spec_from_json(const Json& body) {
  if (!body.is_object()) throw ParseError("request body must be a JSON object", 1, 1);
  if (body.contains("script")) return parse_spec(body.at("script").get<std::string>());
  SpecDef s;
  s.name = body.value("name", std::string("spec"));
  if (!body.contains("vars")) throw ParseError("missing 'vars'", 1, 1);
  const Json& vars = body.at("vars");
  if (vars.is_string()) {
    Parser p(vars.get<std::string>());
    s.vars = p.var_decls();
    p.expect(Tok::End);
  } else {
    for (const auto& v : vars) {
      if (v.is_string()) s.vars.push_back({v.get<std::string>(), 2});
      else s.vars.push_back({v.at("name").get<std::string>(), v.value("dim", 2)});
    }
  }
  if (body.contains("mode")) {
    auto m = parse_mode(body.at("mode").get<std::string>());
    if (!m) throw ParseError("mode must be partial or total", 1, 1);
    s.mode = *m;
  }
  if (body.contains("params"))
    for (const auto& [k, v] : body.at("params").items()) {
      std::vector<std::string> labels;
      for (const auto& l : v) labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
      s.params.add(k, labels);
    }
  if (body.contains("lets"))
    for (const auto& l : body.at("lets")) {
      Parser p(l.get<std::string>());
      s.lets.push_back(p.let_def());
      p.expect(Tok::End);
    }
  s.hole = body.value("hole", std::string("h0"));
  if (!body.contains("clauses")) throw ParseError("missing 'clauses'", 1, 1);
  for (const auto& c : body.at("clauses"))
    s.clauses.push_back({parse_expr(c.at("pre").get<std::string>()), parse_expr(c.at("post").get<std::string>())});
  return s;
}

RuleApplication application_from_json(const Json& body) {
  if (!body.is_object()) throw ParseError("request body must be a JSON object", 1, 1);
  if (body.contains("text")) {
    std::string t = trim(body.at("text").get<std::string>());
    if (t.rfind("refine ", 0) == 0) t = t.substr(7);
    return parse_application(t);
  }
  RuleApplication a;
  a.hole = body.at("hole").get<std::string>();
  a.rule = body.at("rule").get<std::string>();
  if (body.contains("args")) {
    const Json& args = body.at("args");
    if (args.is_object()) {
      const RuleSpec* spec = find_rule(a.rule);
      if (spec)
        for (const auto& as : spec->args)
          if (args.contains(as.key)) a.args.push_back({as.key, trim(args.at(as.key).get<std::string>())});
      for (const auto& [k, v] : args.items())
        if (!a.arg(k)) a.args.push_back({k, trim(v.get<std::string>())});
    } else {
      for (const auto& x : args) a.args.push_back({x.at("key").get<std::string>(), trim(x.at("raw").get<std::string>())});
    }
  }
  if (body.contains("ids"))
    for (const auto& id : body.at("ids")) a.ids.push_back(id.get<std::string>());
  return a;
}

Json session_json(const SessionEntry& e, const ReportOptions& opt) {
  const Session& s = *e.session;
  const auto& reg = s.registry();
  Json j;
  j["id"] = e.id;
  j["name"] = e.name;
  j["mode"] = mode_name(s.mode());
  Json vars = Json::array();
  for (const auto& v : reg.vars()) vars.push_back({{"name", v.name}, {"dim", v.dim}});
  j["registry"] = vars;
  j["program"] = print_program(s.program());
  PrintOptions po;
  po.multiline = true;
  j["program_pretty"] = print_program(s.program(), po);
  j["concrete"] = s.concrete();
  Json holes = Json::array();
  for (const auto& h : s.holes()) {
    Json cl = Json::array();
    for (const auto& c : h.clauses) cl.push_back({{"pre", print_expr(c.pre)}, {"post", print_expr(c.post)}});
    holes.push_back({{"id", h.id}, {"clauses", cl}});
  }
  j["holes"] = holes;
  Json params = Json::object();
  for (const auto& [k, v] : s.params().entries()) params[k] = v;
  j["params"] = params;
  Json ledger = Json::array();
  for (std::size_t i = 0; i < s.ledger().size(); ++i) ledger.push_back(step_json(s.ledger()[i], i + 1, reg, opt));
  j["ledger"] = ledger;
  j["rejections"] = s.rejections().size();
  j["spec"] = print_spec(s.spec());
  j["created"] = e.created;
  j["updated"] = e.updated;
  return j;
}

Json rules_json() {
  Json out = Json::array();
  for (const auto& r : rule_catalog()) {
    Json args = Json::array();
    for (const auto& a : r.args)
      args.push_back({{"key", a.key}, {"kind", arg_kind_name(a.kind)}, {"required", a.required}, {"doc", a.doc}});
    Json modes = Json::array();
    if (r.partial) modes.push_back("partial");
    if (r.total) modes.push_back("total");
    out.push_back({{"name", r.name}, {"args", args}, {"modes", modes}, {"holes", r.holes}, {"doc", r.doc}});
  }
  return out;
}

namespace {

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg, const std::string& kind) {
  send(res, status, Json{{"error", msg}, {"kind", kind}});
}

/// Maps engine exceptions to HTTP status codes.
template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const nlohmann::json::exception& e) {
    send_error(res, 400, e.what(), "json");
  } catch (const ParseError& e) {
    send_error(res, 400, e.what(), "parse");
  } catch (const ConvergenceError& e) {
    send_error(res, 422, e.what(), "convergence");
  } catch (const Error& e) {
    send_error(res, 400, e.what(), "invalid");
  }
}

}  // namespace

void install_routes(httplib::Server& srv, SessionStore& store, const ServerOptions& opt) {
  const ReportOptions ropt;
  srv.set_default_headers({{"Access-Control-Allow-Origin", opt.cors_origin},
                           {"Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
  srv.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/rules", [](const httplib::Request&, httplib::Response& res) { send(res, 200, rules_json()); });

  srv.Get("/examples", [](const httplib::Request&, httplib::Response& res) {
    Json out = Json::array();
    for (const auto& e : example_catalog())
      out.push_back({{"name", e.name}, {"file", e.file}, {"summary", e.summary}});
    send(res, 200, out);
  });

  srv.Get(R"(/examples/([A-Za-z0-9_.]+))", [](const httplib::Request& req, httplib::Response& res) {
    if (!find_example(req.matches[1])) return send_error(res, 404, "unknown example", "not-found");
    res.set_content(example_text(req.matches[1]), "text/plain; charset=utf-8");
  });

  srv.Get("/sessions", [&store, ropt](const httplib::Request&, httplib::Response& res) {
    Json out = Json::array();
    for (const auto& e : store.all()) {
      std::shared_lock lk(e->mu);
      out.push_back({{"id", e->id}, {"name", e->name}, {"concrete", e->session->concrete()}});
    }
    send(res, 200, out);
  });

  srv.Post("/session", [&store, &opt, ropt](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      Json body = Json::parse(req.body);
      SpecDef spec = spec_from_json(body);
      auto e = store.add(std::make_unique<Session>(spec, opt.session), spec.name);
      std::shared_lock lk(e->mu);
      send(res, 201, session_json(*e, ropt));
    });
  });

  srv.Post(R"(/session/from-example/([A-Za-z0-9_.]+))",
           [&store, &opt, ropt](const httplib::Request& req, httplib::Response& res) {
             const std::string name = req.matches[1];
             const ExampleInfo* info = find_example(name);
             if (!info || info->file.find(".qbc") == std::string::npos)
               return send_error(res, 404, "unknown example '" + name + "'", "not-found");
             guarded(res, [&] {
               Replay r = replay_script(parse_script(example_text(info->name)), opt.session);
               if (!r.report.ok())
                 return send(res, 422, Json{{"error", r.report.error},
                                            {"report", replay_json(r.report, r.session->registry(), ropt)}});
               auto e = store.add(std::move(r.session), info->name);
               std::shared_lock lk(e->mu);
               send(res, 201, session_json(*e, ropt));
             });
           });

  auto with_session = [&store](const httplib::Request& req, httplib::Response& res) -> std::shared_ptr<SessionEntry> {
    auto e = store.find(req.matches[1]);
    if (!e) send_error(res, 404, "unknown session '" + std::string(req.matches[1]) + "'", "not-found");
    return e;
  };

  srv.Get(R"(/session/([A-Za-z0-9_-]+))", [with_session, ropt](const httplib::Request& req, httplib::Response& res) {
    auto e = with_session(req, res);
    if (!e) return;
    std::shared_lock lk(e->mu);
    send(res, 200, session_json(*e, ropt));
  });

  srv.Delete(R"(/session/([A-Za-z0-9_-]+))", [&store](const httplib::Request& req, httplib::Response& res) {
    if (!store.erase(req.matches[1])) return send_error(res, 404, "unknown session", "not-found");
    res.status = 204;
  });

  srv.Get(R"(/session/([A-Za-z0-9_-]+)/script)", [with_session](const httplib::Request& req, httplib::Response& res) {
    auto e = with_session(req, res);
    if (!e) return;
    std::shared_lock lk(e->mu);
    res.set_content(e->session->export_script(), "text/plain; charset=utf-8");
  });

  srv.Post(R"(/session/([A-Za-z0-9_-]+)/refine)", [with_session, ropt](const httplib::Request& req, httplib::Response& res) {
    auto e = with_session(req, res);
    if (!e) return;
    std::unique_lock lk(e->mu, std::try_to_lock);
    if (!lk.owns_lock()) return send_error(res, 409, "another mutation is in progress", "conflict");
    guarded(res, [&] {
      RuleApplication app = application_from_json(Json::parse(req.body));
      StepRecord rec = e->session->apply(app);
      const auto& reg = e->session->registry();
      if (rec.accepted) e->updated = now_ms();
      Json body{{"accepted", rec.accepted},
                {"step", step_json(rec, e->session->ledger().size() + (rec.accepted ? 0 : 1), reg, ropt)},
                {"session", session_json(*e, ropt)}};
      send(res, rec.accepted ? 200 : 422, body);
    });
  });

  srv.Post(R"(/session/([A-Za-z0-9_-]+)/undo)", [with_session, ropt](const httplib::Request& req, httplib::Response& res) {
    auto e = with_session(req, res);
    if (!e) return;
    std::unique_lock lk(e->mu, std::try_to_lock);
    if (!lk.owns_lock()) return send_error(res, 409, "another mutation is in progress", "conflict");
    if (e->session->ledger().empty()) return send_error(res, 400, "nothing to undo", "invalid");
    e->session->undo();
    e->updated = now_ms();
    send(res, 200, session_json(*e, ropt));
  });

  srv.Post(R"(/session/([A-Za-z0-9_-]+)/verify)", [with_session, ropt](const httplib::Request& req, httplib::Response& res) {
    auto e = with_session(req, res);
    if (!e) return;
    std::shared_lock lk(e->mu);
    if (!e->session->concrete()) return send_error(res, 400, "program still has holes", "invalid");
    guarded(res, [&] {
      CheckResult r = e->session->verify_constructed();
      send(res, 200, check_json(r, e->session->registry(), ropt));
    });
  });
}

namespace {
httplib::Server* g_server = nullptr;
extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int run_server(const std::string& host, int port, const ServerOptions& opt) {
  httplib::Server srv;
  SessionStore store;
  install_routes(srv, store, opt);
  g_server = &srv;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::fprintf(stderr, "listening on http://%s:%d\n", host.c_str(), port);
  const bool ok = srv.listen(host, port);
  g_server = nullptr;
  if (!opt.snapshot_dir.empty()) {
    const std::size_t n = store.snapshot(opt.snapshot_dir);
    std::fprintf(stderr, "wrote %zu session snapshot(s) to %s\n", n, opt.snapshot_dir.c_str());
  }
  return ok ? 0 : 1;
}

}  // namespace qbc
