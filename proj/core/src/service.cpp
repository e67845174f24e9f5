// Copyright 2026 The deid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "deid/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <mutex>
#include <set>
#include <shared_mutex>

#include "deid/bio_io.hpp"
#include "deid/errors.hpp"
#include "deid/pipeline.hpp"

namespace deid {

Json to_json(const DocSummary& s) {
  return {{"doc_id", s.doc_id},
          {"status", s.status},
          {"revision", s.revision},
          {"span_count", s.span_count},
          {"pretag_available", s.pretag_available}};
}

std::vector<std::string> load_ensembles(const std::filesystem::path& model_dir,
                                        std::vector<EnsembleModel>& out) {
  std::vector<std::string> ids;
  for (const auto& m : load_bank(model_dir)) {
    out.push_back(single_model_ensemble(m));
    ids.push_back(out.back().id());
  }
  if (std::filesystem::exists(model_dir / "ensemble.json")) {
    out.push_back(load_model(model_dir / "ensemble.json"));
    ids.push_back(out.back().id());
  }
  return ids;
}

namespace {

// Request-level failures that are not library errors.
struct HttpError {
  int status;
  std::string kind;
  std::string message;
};

int status_for(const std::string& kind) {
  if (kind == "NotFound") return 404;
  if (kind == "RevisionConflict" || kind == "ConfirmedRecord") return 409;
  if (kind == "OverlapError" || kind == "CrossLineError" || kind == "InvalidSpan" ||
      kind == "EmptyDomain" || kind == "FormatError") {
    return 422;
  }
  return 500;
}

void send_json(httplib::Response& res, Json body, int status = 200) {
  body["schema_version"] = kSchemaVersion;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind,
                const std::string& message) {
  send_json(res, {{"error", kind}, {"message", message}}, status);
}

Json parse_body(const httplib::Request& req) {
  try {
    Json j = Json::parse(req.body);
    if (!j.is_object()) throw HttpError{400, "BadRequest", "body must be a JSON object"};
    return j;
  } catch (const Json::parse_error& e) {
    throw HttpError{400, "BadRequest", std::string("malformed JSON: ") + e.what()};
  }
}

std::string param(const httplib::Request& req, const std::string& key,
                  const std::string& fallback = {}) {
  return req.has_param(key) ? req.get_param_value(key) : fallback;
}

std::string status_name(const std::optional<AnnotationRecord>& r) {
  if (!r) return "none";
  return std::string(to_string(r->status));
}

}  // namespace

struct Service::Impl {
  AnnotationStore& store;
  ServiceOptions options;
  httplib::Server server;
  mutable std::shared_mutex mu;
  std::map<std::string, EnsembleModel> ensembles;
  std::map<std::string, std::vector<std::string>> sets;

  Impl(AnnotationStore& s, ServiceOptions o) : store(s), options(std::move(o)) {}

  std::string annotator(const httplib::Request& req) const {
    return param(req, "annotator", options.default_annotator);
  }

  std::vector<std::string> set_ids(const std::string& name) const {
    if (name.empty() || name == "all") return store.document_ids();
    std::shared_lock lock(mu);
    auto it = sets.find(name);
    if (it == sets.end()) throw NotFound("unknown set '" + name + "'");
    std::vector<std::string> ids = it->second;
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  template <typename Fn>
  httplib::Server::Handler wrap(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const HttpError& e) {
        send_error(res, e.status, e.kind, e.message);
      } catch (const Error& e) {
        send_error(res, status_for(e.kind()), e.kind(), e.what());
      } catch (const Json::exception& e) {
        send_error(res, 400, "BadRequest", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "InternalError", e.what());
      }
    };
  }

  std::vector<DocSummary> summaries_for(const std::string& annotator) const;
  void routes();
};

std::vector<DocSummary> Service::Impl::summaries_for(const std::string& annotator) const {
  std::vector<DocSummary> out;
  for (const auto& id : store.document_ids()) {
    const auto rec = store.get(id, annotator);
    DocSummary s{id, status_name(rec), 0, 0, false};
    if (rec) {
      s.revision = rec->revision;
      s.span_count = rec->spans.size();
      s.pretag_available = std::any_of(rec->spans.begin(), rec->spans.end(), [](const PiiSpan& p) {
        return p.source == SpanSource::kMachine;
      });
    }
    out.push_back(std::move(s));
  }
  return out;
}

void Service::Impl::routes() {
  server.Get("/api/docs", wrap([this](const httplib::Request& req, httplib::Response& res) {
    Json docs = Json::array();
    for (const auto& s : summaries_for(annotator(req))) docs.push_back(to_json(s));
    send_json(res, {{"docs", std::move(docs)}});
  }));

  server.Post("/api/docs", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const Json body = parse_body(req);
    const std::string id = body.at("doc_id").get<std::string>();
    if (id.empty()) throw HttpError{400, "BadRequest", "doc_id must not be empty"};
    std::unique_lock lock(mu);
    if (store.has_document(id)) {
      throw HttpError{409, "DuplicateDocument", "document '" + id + "' already exists"};
    }
    store.add_document(Document(id, body.at("text").get<std::string>()));
    send_json(res, {{"doc_id", id}}, 201);
  }));

  server.Get(R"(/api/docs/([^/]+))",
             wrap([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               const Document& doc = store.document(id);
               const std::string who = annotator(req);
               const auto rec = store.get(id, who);
               Json spans = Json::array();
               if (rec) {
                 for (const auto& s : rec->spans) spans.push_back(to_json(s));
               }
               send_json(res, {{"doc_id", id},
                               {"annotator", who},
                               {"text", doc.text()},
                               {"spans", std::move(spans)},
                               {"revision", rec ? rec->revision : 0},
                               {"status", status_name(rec)}});
             }));

  server.Put(R"(/api/docs/([^/]+)/spans)",
             wrap([this](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               const Json body = parse_body(req);
               const std::string who =
                   body.contains("annotator") ? body["annotator"].get<std::string>()
                                              : options.default_annotator;
               RecordStatus status = RecordStatus::kInProgress;
               if (body.contains("status")) {
                 const auto parsed = parse_status(body["status"].get<std::string>());
                 if (!parsed) throw HttpError{400, "BadRequest", "unknown status"};
                 status = *parsed;
               }
               std::vector<PiiSpan> spans;
               for (const auto& s : body.at("spans")) spans.push_back(span_from_json(s, who));
               const auto revision = store.save_annotation(
                   id, who, std::move(spans), body.at("revision").get<std::uint64_t>(), status);
               send_json(res, {{"revision", revision}});
             }));

  server.Post(R"(/api/docs/([^/]+)/pretag)",
              wrap([this](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                const Json body = parse_body(req);
                const std::string ens_id = body.at("ensemble_id").get<std::string>();
                const std::string who =
                    body.contains("annotator") ? body["annotator"].get<std::string>()
                                               : options.default_annotator;
                const Document& doc = store.document(id);
                std::vector<PiiSpan> predicted;
                {
                  std::shared_lock lock(mu);
                  auto it = ensembles.find(ens_id);
                  if (it == ensembles.end()) throw NotFound("unknown ensemble '" + ens_id + "'");
                  predicted = apply_ensemble(it->second, doc);
                }
                const AnnotationRecord rec = store.ingest_pretag(id, who, std::move(predicted));
                Json spans = Json::array();
                for (const auto& s : rec.spans) {
                  if (s.source == SpanSource::kMachine) spans.push_back(to_json(s));
                }
                send_json(res, {{"doc_id", id},
                                {"ensemble_id", ens_id},
                                {"annotator", who},
                                {"spans", std::move(spans)},
                                {"revision", rec.revision}});
              }));

  server.Get("/api/export/bio", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const auto ids = set_ids(param(req, "set"));
    std::optional<std::string> who;
    if (req.has_param("annotator")) who = req.get_param_value("annotator");
    const bool unconfirmed = param(req, "include_unconfirmed") == "1";
    const auto bio = store.export_bio(ids, who, unconfirmed);
    res.set_header("X-Schema-Version", std::to_string(kSchemaVersion));
    res.set_content(write_bio(bio), "text/plain; charset=utf-8");
  }));

  server.Get("/api/iaa", wrap([this](const httplib::Request& req, httplib::Response& res) {
    const std::string a1 = param(req, "a1");
    const std::string a2 = param(req, "a2");
    if (a1.empty() || a2.empty()) throw HttpError{400, "BadRequest", "a1 and a2 are required"};
    const auto known = store.annotators();
    for (const auto& a : {a1, a2}) {
      if (!std::binary_search(known.begin(), known.end(), a)) {
        throw NotFound("unknown annotator '" + a + "'");
      }
    }
    std::vector<Document> docs;
    SpanSet sa, sb;
    for (const auto& id : set_ids(param(req, "set"))) {
      const auto ra = store.get(id, a1);
      const auto rb = store.get(id, a2);
      if (!ra || !rb) continue;
      docs.push_back(store.document(id));
      sa[id] = ra->spans;
      sb[id] = rb->spans;
    }
    Json body = to_json(iaa_report(docs, sa, sb));
    body["a1"] = a1;
    body["a2"] = a2;
    send_json(res, std::move(body));
  }));

  server.Get("/api/ensembles", wrap([this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mu);
    Json ids = Json::array();
    for (const auto& [id, _] : ensembles) ids.push_back(id);
    send_json(res, {{"ensembles", std::move(ids)}});
  }));

  if (!options.static_dir.empty()) server.set_mount_point("/", options.static_dir.string());
}

Service::Service(AnnotationStore& store, ServiceOptions options)
    : impl_(std::make_unique<Impl>(store, std::move(options))) {
  impl_->routes();
}

Service::~Service() { stop(); }

void Service::add_ensemble(EnsembleModel model) {
  std::unique_lock lock(impl_->mu);
  const std::string id = model.id();
  impl_->ensembles.insert_or_assign(id, std::move(model));
}

void Service::add_set(const std::string& name, std::vector<std::string> doc_ids) {
  std::unique_lock lock(impl_->mu);
  impl_->sets[name] = std::move(doc_ids);
}

std::vector<DocSummary> Service::summaries(const std::string& annotator) const {
  return impl_->summaries_for(annotator);
}

bool Service::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int Service::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool Service::run() { return impl_->server.listen_after_bind(); }

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace deid
