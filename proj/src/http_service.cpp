#include "boincx/http_service.hpp"

#include <httplib.h>

#include "boincx/io.hpp"

namespace boincx {

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

// Runs `body`, mapping exceptions to JSON error responses.
template <class F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const ServiceError& e) {
    send_error(res, e.status(), e.code(), e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "bad_request", e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 422, "invalid_request", e.what());
  } catch (const std::domain_error& e) {
    send_error(res, 422, "invalid_request", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "internal_error", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ServiceError(400, "bad_request", std::string("request body is not valid JSON: ") + e.what());
  }
}

json recommendation_json(const TrialRecord& r) {
  json doc = {{"trial_id", r.trial_id},
              {"status", to_string(r.state.status)},
              {"recommendation", r.state.running() ? to_json(r.state.current) : json(nullptr)},
              {"recommendation_label", r.state.running() ? json(r.grid.dose_label(r.state.current)) : json(nullptr)},
              {"cohorts", r.state.cohorts()},
              {"total_n", r.state.total_n()},
              {"lambda_e", r.params.lambda_e},
              {"lambda_d", r.params.lambda_d},
              {"last_decision", r.decisions.empty() ? json(nullptr) : to_json(r.decisions.back())},
              {"state", to_json(r.state)}};
  return doc;
}

}  // namespace

HttpService::HttpService(TrialRegistry& registry, std::optional<std::string> token)
    : registry_(registry), token_(std::move(token)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpService::~HttpService() = default;

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpService::listen() { return server_->listen_after_bind(); }

void HttpService::stop() { server_->stop(); }

void HttpService::wait_until_ready() const { server_->wait_until_ready(); }

void HttpService::install_routes() {
  auto& s = *server_;
  s.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response& res) {
    if (!token_) return httplib::Server::HandlerResponse::Unhandled;
    if (req.get_header_value("Authorization") == "Bearer " + *token_)
      return httplib::Server::HandlerResponse::Unhandled;
    send_error(res, 401, "unauthorized", "missing or invalid bearer token");
    return httplib::Server::HandlerResponse::Handled;
  });

  s.Post("/trials", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = registry_.create_trial(setup_from_json(parse_body(req)));
      send_json(res, 201, to_json(registry_.get(id)));
    });
  });

  s.Get("/trials", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, {{"trials", registry_.list()}}); });
  });

  s.Get(R"(/trials/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, to_json(registry_.get(req.matches[1]))); });
  });

  s.Post(R"(/trials/([A-Za-z0-9_-]+)/cohorts)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      CohortRequest cohort;
      try {
        cohort.at = cell_from_json(body.at("at"));
        cohort.dlt = body.at("dlt").get<int>();
        cohort.override_recommendation = body.value("override", false);
        cohort.note = body.value("note", std::string());
      } catch (const std::exception& e) {
        throw ServiceError(422, "invalid_cohort", std::string("cohort body needs at:[i,j] and dlt: ") + e.what());
      }
      send_json(res, 200, recommendation_json(registry_.post_cohort(req.matches[1], cohort)));
    });
  });

  s.Get(R"(/trials/([A-Za-z0-9_-]+)/recommendation)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, recommendation_json(registry_.get(req.matches[1]))); });
  });

  s.Get(R"(/trials/([A-Za-z0-9_-]+)/selection)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const auto sel = registry_.selection(id);
      const TrialRecord r = registry_.get(id);
      send_json(res, 200,
                {{"trial_id", id},
                 {"status", to_string(r.state.status)},
                 {"selection", sel.mtc ? to_json(*sel.mtc) : json(nullptr)},
                 {"selection_label", sel.mtc ? json(r.grid.dose_label(*sel.mtc)) : json(nullptr)},
                 {"isotonic", sel.fit ? to_json(*sel.fit) : json(nullptr)}});
    });
  });

  s.Get(R"(/trials/([A-Za-z0-9_-]+)/decision-table)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string id = req.matches[1];
      const TrialRecord r = registry_.get(id);
      json rows = json::array();
      for (const auto& w : registry_.what_if(id))
        rows.push_back({{"dlt", w.dlt}, {"n_total", w.n_total}, {"y_total", w.y_total}, {"decision", to_json(w.decision)}});
      const int n_max = r.params.max_cohorts * r.params.cohort_size;
      send_json(res, 200,
                {{"trial_id", id},
                 {"current", r.state.running() ? to_json(r.state.current) : json(nullptr)},
                 {"table", to_json(decision_table(r.params, n_max))},
                 {"what_if", rows}});
    });
  });
}

}  // namespace boincx
