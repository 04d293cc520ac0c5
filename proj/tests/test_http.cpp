#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "ssa/http_api.hpp"
#include "support/agenda_fixture.hpp"

using namespace ssa;
using nlohmann::json;
using testing_support::kDutyConflict;
using testing_support::meeting_body;
using testing_support::relationship_body;
using testing_support::small_bundle;
using testing_support::temp_dir;

namespace {

constexpr const char* kToken = "s3cret";

/// Server on an ephemeral loopback port, torn down with the test.
class HttpTest : public ::testing::Test {
 protected:
  void start(const std::string& token, bool with_models) {
    store_ = std::make_unique<Store>(StoreOptions{temp_dir("http"), 64, false});
    service_ = std::make_unique<AgendaService>(*store_, testing_support::fixed_clock_options());
    if (with_models) service_->set_models(small_bundle());
    install_routes(server_, *service_, HttpOptions{"127.0.0.1", 0, token});
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    if (!token.empty()) client_->set_bearer_token_auth(token);
  }

  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  struct Reply {
    int status;
    json body;
  };

  Reply call(const std::string& method, const std::string& path, const json& body = {}) {
    httplib::Result r;
    const std::string text = body.is_null() ? "" : body.dump();
    if (method == "GET") r = client_->Get(path);
    if (method == "PUT") r = client_->Put(path, text, "application/json");
    if (method == "POST") r = client_->Post(path, text, "application/json");
    if (method == "DELETE") r = client_->Delete(path);
    EXPECT_TRUE(r) << method << " " << path;
    if (!r) return {0, json()};
    EXPECT_EQ(r->get_header_value("Content-Type"), "application/json");
    return {r->status, json::parse(r->body)};
  }

  void seed() {
    EXPECT_EQ(call("PUT", "/contacts/ana", {{"name", "Ana"}}).status, 200);
    EXPECT_EQ(call("PUT", "/contacts/ben", {{"name", "Ben"}}).status, 200);
    EXPECT_EQ(call("PUT", "/contacts/ana/relationship", relationship_body()).status, 200);
    EXPECT_EQ(call("PUT", "/contacts/ben/relationship", relationship_body()).status, 200);
    EXPECT_EQ(call("POST", "/meetings",
                   meeting_body("update", "Weekly update", "2026-03-02T09:00:00Z",
                                "2026-03-02T10:00:00Z", "ana", "neither"))
                  .status,
              201);
    EXPECT_EQ(call("POST", "/meetings",
                   meeting_body("help", "Help with report", "2026-03-02T09:30:00Z",
                                "2026-03-02T10:30:00Z", "ben", "giving_help"))
                  .status,
              201);
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<Store> store_;
  std::unique_ptr<AgendaService> service_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

TEST_F(HttpTest, EveryEndpointRoundTrips) {
  start(kToken, true);
  const auto contact = call("PUT", "/contacts/ana", {{"name", "Ana"}});
  EXPECT_EQ(contact.body.at("contact").at("name"), "Ana");
  EXPECT_EQ(contact.body.at("schema_version"), "1.0");
  seed();

  const auto rel = call("PUT", "/contacts/ana/relationship", relationship_body("friend", 6));
  EXPECT_EQ(rel.status, 200);
  EXPECT_EQ(rel.body.at("relationship").at("role"), "friend");
  EXPECT_EQ(rel.body.at("relationship").at("relationship_quality"), "6");
  EXPECT_EQ(call("PUT", "/contacts/ana/relationship", relationship_body()).status, 200);

  const auto conflicts = call("GET", "/conflicts");
  EXPECT_EQ(conflicts.status, 200);
  ASSERT_EQ(conflicts.body.at("conflicts").size(), 1u);
  EXPECT_EQ(conflicts.body.at("conflicts")[0].at("id"), kDutyConflict);

  const auto s = call("GET", "/conflicts/" + kDutyConflict + "/suggestion");
  EXPECT_EQ(s.status, 200);
  EXPECT_EQ(s.body.at("suggestion").at("chosen_meeting_id"), "help");
  EXPECT_TRUE(s.body.at("explanations").contains("level1"));
  EXPECT_TRUE(s.body.at("explanations").contains("level2"));
  EXPECT_EQ(s.body, service_->suggestion(kDutyConflict));

  const auto fb = call("POST", "/conflicts/" + kDutyConflict + "/feedback",
                       {{"suggested_meeting_id", "help"},
                        {"decision", "accepted"},
                        {"shown_styles", {"level1", "level2"}}});
  EXPECT_EQ(fb.status, 201);
  EXPECT_EQ(fb.body.at("ack"), true);
  EXPECT_EQ(fb.body.at("feedback_count"), 1);

  const auto health = call("GET", "/healthz");
  EXPECT_EQ(health.status, 200);
  EXPECT_EQ(health.body.at("status"), "ok");
  EXPECT_EQ(health.body.at("models_loaded"), true);
}

TEST_F(HttpTest, SuggestionIsIdenticalAcrossRepeatedCalls) {
  start("", true);
  seed();
  const auto first = client_->Get("/conflicts/" + kDutyConflict + "/suggestion");
  ASSERT_TRUE(first);
  for (int i = 0; i < 100; ++i) {
    const auto r = client_->Get("/conflicts/" + kDutyConflict + "/suggestion");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->body, first->body);
  }
}

TEST_F(HttpTest, BearerTokenIsEnforced) {
  start(kToken, false);
  httplib::Client anonymous("127.0.0.1", port_);
  const auto r = anonymous.Get("/conflicts");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 401);
  EXPECT_EQ(r->get_header_value("WWW-Authenticate"), "Bearer");
  const auto body = json::parse(r->body);
  EXPECT_EQ(body.at("code"), "Unauthorized");
  EXPECT_EQ(body.at("schema_version"), "1.0");

  httplib::Client wrong("127.0.0.1", port_);
  wrong.set_bearer_token_auth("nope");
  EXPECT_EQ(wrong.Put("/contacts/x", "{}", "application/json")->status, 401);
  EXPECT_EQ(store_->log_entries(), 0u);

  EXPECT_EQ(anonymous.Get("/healthz")->status, 200);
  EXPECT_EQ(call("GET", "/conflicts").status, 200);
}

TEST_F(HttpTest, ErrorsAreStructured) {
  start("", false);
  seed();
  const auto no_model = call("GET", "/conflicts/" + kDutyConflict + "/suggestion");
  EXPECT_EQ(no_model.status, 503);
  EXPECT_EQ(no_model.body.at("code"), "ModelNotLoaded");

  service_->set_models(small_bundle());
  const auto unknown = call("GET", "/conflicts/c-x-y/suggestion");
  EXPECT_EQ(unknown.status, 404);
  EXPECT_EQ(unknown.body.at("code"), "UnknownConflict");
  EXPECT_EQ(unknown.body.at("field"), "c-x-y");

  const auto fb = call("POST", "/conflicts/c-x-y/feedback",
                       {{"suggested_meeting_id", "a"}, {"decision", "accepted"}});
  EXPECT_EQ(fb.status, 404);

  EXPECT_EQ(call("PUT", "/contacts/eve", json::object()).status, 200);
  EXPECT_EQ(call("POST", "/meetings",
                 meeting_body("e", "E", "2026-03-02T09:00:00Z", "2026-03-02T11:00:00Z", "eve"))
                .status,
            201);
  const auto missing = call("GET", "/conflicts/c-e-update/suggestion");
  EXPECT_EQ(missing.status, 409);
  EXPECT_EQ(missing.body.at("code"), "MissingRelationship");
  EXPECT_EQ(missing.body.at("field"), "eve");

  auto bad_rel = relationship_body();
  bad_rel["relationship_quality"] = 8;
  const auto range = call("PUT", "/contacts/ana/relationship", bad_rel);
  EXPECT_EQ(range.status, 400);
  EXPECT_EQ(range.body.at("code"), "OutOfRange");
  EXPECT_EQ(range.body.at("field"), "relationship_quality");
  ASSERT_TRUE(range.body.contains("violations"));
  EXPECT_EQ(range.body.at("violations")[0].at("field"), "relationship_quality");

  const auto no_contact = call("PUT", "/contacts/ghost/relationship", relationship_body());
  EXPECT_EQ(no_contact.status, 404);
  EXPECT_EQ(no_contact.body.at("code"), "UnknownContact");

  const auto bad_meeting = call("POST", "/meetings", {{"title", "x"}});
  EXPECT_EQ(bad_meeting.status, 400);
  EXPECT_GE(bad_meeting.body.at("violations").size(), 5u);

  const auto r = client_->Post("/meetings", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body).at("code"), "FormatError");
}

TEST_F(HttpTest, UnknownRoutesGetJsonNotFound) {
  start("", false);
  const auto r = call("GET", "/nowhere");
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body.at("code"), "NotFound");
  EXPECT_EQ(r.body.at("schema_version"), "1.0");
  EXPECT_EQ(call("DELETE", "/conflicts").status, 404);
}
