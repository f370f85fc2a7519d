#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "qbc/server/server.hpp"

#include <httplib.h>

using namespace qbc;

namespace {

class ServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    install_routes(srv_, store_, opt_);
    port_ = srv_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { srv_.listen_after_bind(); });
    srv_.wait_until_ready();
    cli_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }
  void TearDown() override {
    srv_.stop();
    thread_.join();
  }

  Json post(const std::string& path, const Json& body, int* status) {
    auto r = cli_->Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r);
    *status = r->status;
    return r->body.empty() ? Json() : Json::parse(r->body);
  }
  Json get(const std::string& path, int* status) {
    auto r = cli_->Get(path);
    EXPECT_TRUE(r);
    *status = r->status;
    return r->body.empty() ? Json() : Json::parse(r->body);
  }

  std::string create_coin() {
    int st = 0;
    Json j = post("/session",
                  {{"name", "coin"},
                   {"vars", Json::array({"q"})},
                   {"mode", "total"},
                   {"params", {{"x", Json::array({"0", "1"})}}},
                   {"hole", "h0"},
                   {"clauses", Json::array({{{"pre", "0.5 * I"}, {"post", "proj(|x>)"}}})}},
                  &st);
    EXPECT_EQ(st, 201);
    return j["id"];
  }

  httplib::Server srv_;
  SessionStore store_;
  ServerOptions opt_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> cli_;
};

}  // namespace

TEST_F(ServerTest, FairCoinFlow) {
  const std::string id = create_coin();
  int st = 0;
  Json r = post("/session/" + id + "/refine",
                {{"hole", "h0"}, {"rule", "H.seq"}, {"args", {{"R", "H * proj(|x>) * H"}}}}, &st);
  EXPECT_EQ(st, 200);
  EXPECT_EQ(r["accepted"], true);
  EXPECT_EQ(r["session"]["holes"].size(), 2u);
  r = post("/session/" + id + "/refine", {{"text", "refine h1 with H.init(vars: q)"}}, &st);
  EXPECT_EQ(st, 200);
  r = post("/session/" + id + "/refine", {{"hole", "h2"}, {"rule", "H.unit"}, {"args", {{"vars", "q"}, {"U", "H"}}}},
           &st);
  EXPECT_EQ(st, 200);
  for (const auto& o : r["step"]["obligations"]) EXPECT_EQ(o["verdict"], "holds");
  EXPECT_EQ(r["session"]["concrete"], true);
  Json v = post("/session/" + id + "/verify", Json::object(), &st);
  EXPECT_EQ(st, 200);
  EXPECT_EQ(v["verdict"], "holds");
  auto script = cli_->Get("/session/" + id + "/script");
  ASSERT_TRUE(script);
  EXPECT_NE(script->body.find("refine h2 with H.unit(vars: q; U: H)"), std::string::npos);
  Replay replay = replay_script(parse_script(script->body));
  EXPECT_TRUE(replay.report.ok()) << replay.report.error;
}

TEST_F(ServerTest, RejectedStepIs422) {
  const std::string id = create_coin();
  int st = 0;
  post("/session/" + id + "/refine", {{"text", "h0 with H.seq(R: proj(|1>))"}}, &st);
  EXPECT_EQ(st, 200);
  Json r = post("/session/" + id + "/refine", {{"text", "h1 with H.init(vars: q)"}}, &st);
  EXPECT_EQ(st, 422);
  EXPECT_EQ(r["accepted"], false);
  EXPECT_EQ(r["step"]["obligations"].back()["verdict"], "fails");
  EXPECT_EQ(r["session"]["rejections"], 1);
}

TEST_F(ServerTest, ErrorStatuses) {
  int st = 0;
  post("/session", {{"vars", Json::array({"q"})}}, &st);
  EXPECT_EQ(st, 400);
  auto bad = cli_->Post("/session", "{not json", "application/json");
  EXPECT_EQ(bad->status, 400);
  get("/session/nope", &st);
  EXPECT_EQ(st, 404);
  post("/session/nope/refine", {{"text", "h0 with H.skip"}}, &st);
  EXPECT_EQ(st, 404);
  const std::string id = create_coin();
  post("/session/" + id + "/refine", {{"text", "h0 with H.bogus"}}, &st);
  EXPECT_EQ(st, 400);
  post("/session/" + id + "/verify", Json::object(), &st);
  EXPECT_EQ(st, 400);
  post("/session/" + id + "/undo", Json::object(), &st);
  EXPECT_EQ(st, 400);
}

TEST_F(ServerTest, ConcurrentMutationIs409) {
  const std::string id = create_coin();
  auto e = store_.find(id);
  ASSERT_TRUE(e);
  int st = 0;
  {
    std::unique_lock lk(e->mu);
    post("/session/" + id + "/refine", {{"text", "h0 with H.seq(R: H * proj(|x>) * H)"}}, &st);
    EXPECT_EQ(st, 409);
    post("/session/" + id + "/undo", Json::object(), &st);
    EXPECT_EQ(st, 409);
  }
  post("/session/" + id + "/refine", {{"text", "h0 with H.seq(R: H * proj(|x>) * H)"}}, &st);
  EXPECT_EQ(st, 200);
}

TEST_F(ServerTest, UndoAndState) {
  const std::string id = create_coin();
  int st = 0;
  post("/session/" + id + "/refine", {{"text", "h0 with H.seq(R: H * proj(|x>) * H)"}}, &st);
  Json s = post("/session/" + id + "/undo", Json::object(), &st);
  EXPECT_EQ(st, 200);
  EXPECT_EQ(s["holes"].size(), 1u);
  EXPECT_EQ(s["ledger"].size(), 0u);
  s = get("/session/" + id, &st);
  EXPECT_EQ(st, 200);
  EXPECT_EQ(s["mode"], "total");
  EXPECT_EQ(s["registry"][0]["name"], "q");
  EXPECT_EQ(s["params"]["x"].size(), 2u);
}

TEST_F(ServerTest, RulesExamplesAndCors) {
  auto r = cli_->Get("/rules");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
  Json rules = Json::parse(r->body);
  bool seq = false;
  for (const auto& x : rules) seq = seq || x["name"] == "H.seq";
  EXPECT_TRUE(seq);
  int st = 0;
  Json ex = get("/examples", &st);
  EXPECT_EQ(st, 200);
  EXPECT_GE(ex.size(), 9u);
  Json s = post("/session/from-example/teleport", Json::object(), &st);
  EXPECT_EQ(st, 201);
  EXPECT_EQ(s["concrete"], true);
  post("/session/from-example/nope", Json::object(), &st);
  EXPECT_EQ(st, 404);
  auto pre = cli_->Options("/session");
  ASSERT_TRUE(pre);
  EXPECT_EQ(pre->status, 204);
  EXPECT_FALSE(pre->get_header_value("Access-Control-Allow-Methods").empty());
}

TEST_F(ServerTest, ScriptBodyAndSnapshot) {
  int st = 0;
  Json s = post("/session",
                {{"script", "spec coin {\n  vars q;\n  mode total;\n  hole h0 : pre 0.5 * I => post proj(|0>)\n}\n"}},
                &st);
  EXPECT_EQ(st, 201);
  const auto dir = std::filesystem::temp_directory_path() / ("qbc_snap_" + std::to_string(port_));
  EXPECT_EQ(store_.snapshot(dir.string()), 1u);
  const auto file = dir / (s["id"].get<std::string>() + ".json");
  ASSERT_TRUE(std::filesystem::exists(file));
  std::filesystem::remove_all(dir);
}
