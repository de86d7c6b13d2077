#include "twr/permission_engine.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace twr {

using json = nlohmann::ordered_json;

std::string_view to_string(ProtectionKind kind) noexcept {
    switch (kind) {
    case ProtectionKind::UserDependentTap: return "user_dependent_tap";
    case ProtectionKind::UserIndependentProx: return "user_independent_prox";
    case ProtectionKind::Unprotected: return "unprotected";
    }
    return "unprotected";
}

ProtectionKind parse_protection_kind(std::string_view text) {
    if (text == "user_dependent_tap" || text == "tap")
        return ProtectionKind::UserDependentTap;
    if (text == "user_independent_prox" || text == "prox")
        return ProtectionKind::UserIndependentProx;
    if (text == "unprotected" || text == "none")
        return ProtectionKind::Unprotected;
    throw std::invalid_argument("unknown protection kind '" + std::string(text) + "'");
}

const GesturePolicy* GestureDatabase::find_policy(std::string_view service) const {
    const auto it = policies_.find(std::string(service));
    return it == policies_.end() ? nullptr : &it->second;
}

const GestureTemplate* GestureDatabase::find_template(std::string_view id) const {
    const auto it = templates_.find(std::string(id));
    return it == templates_.end() ? nullptr : &it->second;
}

void GestureDatabase::register_policy(GesturePolicy policy) {
    if (policy.service.empty())
        throw DatabaseError("policy needs a service name");
    if (policy.capture_window <= 0)
        throw DatabaseError("policy for service '" + policy.service + "' needs a positive capture window");
    if (policy.kind == ProtectionKind::UserDependentTap) {
        if (!policy.template_id)
            throw DatabaseError("tap policy for service '" + policy.service + "' needs a template id");
        if (!find_template(*policy.template_id))
            throw DatabaseError("policy for service '" + policy.service + "' references unknown template '" +
                                *policy.template_id + "'");
    } else {
        policy.template_id.reset();
    }
    auto key = policy.service;
    policies_.insert_or_assign(std::move(key), std::move(policy));
}

bool GestureDatabase::remove_policy(std::string_view service) {
    return policies_.erase(std::string(service)) > 0;
}

void GestureDatabase::put_template(const std::string& id, GestureTemplate tmpl) {
    if (id.empty())
        throw DatabaseError("template id must not be empty");
    templates_.insert_or_assign(id, std::move(tmpl));
}

const GestureTemplate& GestureDatabase::create_template(const std::string& id, std::span<const AccelTrace> traces,
                                                        std::size_t n, AxisRule rule) {
    put_template(id, build_template(traces, n, rule));
    return templates_.at(id);
}

bool GestureDatabase::remove_template(std::string_view id) {
    const auto it = templates_.find(std::string(id));
    if (it == templates_.end())
        return false;
    for (const auto& [service, policy] : policies_)
        if (policy.template_id && *policy.template_id == id)
            throw DatabaseError("template '" + std::string(id) + "' is still used by service '" + service + "'");
    templates_.erase(it);
    return true;
}

std::string serialize_db(const GestureDatabase& db) {
    json doc;
    doc["format"] = "twr-gesture-db";
    doc["version"] = GestureDatabase::kFormatVersion;
    json templates = json::array();
    for (const auto& [id, t] : db.templates()) {
        templates.push_back({{"id", id},
                             {"n", t.n()},
                             {"axis_rule", std::string(to_string(t.axis_rule()))},
                             {"threshold", t.threshold()},
                             {"created_from", t.created_from()},
                             {"reference", format_accel_trace(t.reference())}});
    }
    json policies = json::array();
    for (const auto& [service, p] : db.policies()) {
        json entry = {{"service", service},
                      {"kind", std::string(to_string(p.kind))},
                      {"capture_window_ms", p.capture_window}};
        if (p.template_id)
            entry["template_id"] = *p.template_id;
        policies.push_back(std::move(entry));
    }
    doc["templates"] = std::move(templates);
    doc["policies"] = std::move(policies);
    return doc.dump(2) + "\n";
}

GestureDatabase deserialize_db(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DatabaseError(std::string("malformed gesture database: ") + e.what());
    }
    try {
        if (doc.value("format", std::string{}) != "twr-gesture-db")
            throw DatabaseError("not a gesture database (missing format tag)");
        const int version = doc.at("version").get<int>();
        if (version != GestureDatabase::kFormatVersion)
            throw DatabaseError("unsupported gesture database version " + std::to_string(version));

        GestureDatabase db;
        for (const auto& t : doc.at("templates")) {
            const auto id = t.at("id").get<std::string>();
            AccelTrace reference = parse_accel_trace(t.at("reference").get<std::string>());
            const auto n = t.at("n").get<std::size_t>();
            if (reference.size() != n)
                throw DatabaseError("template '" + id + "' declares n=" + std::to_string(n) + " but stores " +
                                    std::to_string(reference.size()) + " samples");
            if (db.find_template(id))
                throw DatabaseError("duplicate template id '" + id + "'");
            db.put_template(id, GestureTemplate(std::move(reference), t.at("threshold").get<double>(),
                                                parse_axis_rule(t.at("axis_rule").get<std::string>()),
                                                t.at("created_from").get<std::size_t>()));
        }
        for (const auto& p : doc.at("policies")) {
            GesturePolicy policy;
            policy.service = p.at("service").get<std::string>();
            policy.kind = parse_protection_kind(p.at("kind").get<std::string>());
            policy.capture_window = p.value("capture_window_ms", Millis{2000});
            if (p.contains("template_id"))
                policy.template_id = p.at("template_id").get<std::string>();
            if (db.find_policy(policy.service))
                throw DatabaseError("duplicate policy for service '" + policy.service + "'");
            db.register_policy(std::move(policy));
        }
        return db;
    } catch (const json::exception& e) {
        throw DatabaseError(std::string("malformed gesture database: ") + e.what());
    } catch (const TraceError& e) {
        throw DatabaseError(std::string("malformed template reference: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw DatabaseError(std::string("invalid gesture database entry: ") + e.what());
    }
}

GestureDatabase load_db(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw DatabaseError("cannot open gesture database '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_db(ss.str());
}

void save_db(const GestureDatabase& db, const std::string& path) {
    const auto text = serialize_db(db);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DatabaseError("cannot write gesture database '" + path + "'");
    out << text;
    out.flush();
    if (!out)
        throw DatabaseError("failed writing gesture database '" + path + "'");
}

std::string_view to_string(Outcome o) noexcept {
    return o == Outcome::Forward ? "FORWARD" : "REJECT";
}

std::string_view to_string(Reason r) noexcept {
    switch (r) {
    case Reason::Unprotected: return "UNPROTECTED";
    case Reason::GestureMatched: return "GESTURE_MATCHED";
    case Reason::WithinUnlockWindow: return "WITHIN_UNLOCK_WINDOW";
    case Reason::NoGesture: return "NO_GESTURE";
    case Reason::TemplateMissing: return "TEMPLATE_MISSING";
    }
    return "NO_GESTURE";
}

Outcome parse_outcome(std::string_view text) {
    if (text == "FORWARD")
        return Outcome::Forward;
    if (text == "REJECT")
        return Outcome::Reject;
    throw std::invalid_argument("unknown outcome '" + std::string(text) + "'");
}

Reason parse_reason(std::string_view text) {
    for (auto r : {Reason::Unprotected, Reason::GestureMatched, Reason::WithinUnlockWindow, Reason::NoGesture,
                   Reason::TemplateMissing})
        if (to_string(r) == text)
            return r;
    throw std::invalid_argument("unknown reason '" + std::string(text) + "'");
}

Decision Decision::forward(Reason why, std::optional<double> score) {
    if (why != Reason::Unprotected && why != Reason::GestureMatched && why != Reason::WithinUnlockWindow)
        throw std::invalid_argument("reason " + std::string(to_string(why)) + " cannot forward");
    return {Outcome::Forward, why, score};
}

Decision Decision::reject(Reason why, std::optional<double> score) {
    if (why != Reason::NoGesture && why != Reason::TemplateMissing)
        throw std::invalid_argument("reason " + std::string(to_string(why)) + " cannot reject");
    return {Outcome::Reject, why, score};
}

namespace {

Decision decide_tap(const AccessRequest& req, const GesturePolicy& policy, const GestureTemplate& tmpl,
                    const SensorContext& sensors, const EngineOptions& opts) {
    if (!sensors.accel)
        return Decision::reject(Reason::NoGesture);
    const auto capture = slice(*sensors.accel, req.t - policy.capture_window, req.t + opts.wait_forward_ms);
    if (!capture)
        return Decision::reject(Reason::NoGesture);
    const auto w = window_samples(*capture, tmpl);
    if (w < 2 || w > capture->size())
        return Decision::reject(Reason::NoGesture);
    // A window must span enough milliseconds to hold n distinct grid points.
    if ((*capture)[w - 1].t - (*capture)[0].t < static_cast<Millis>(tmpl.n() - 1))
        return Decision::reject(Reason::NoGesture);

    const auto scores = score_windows(*capture, tmpl, opts.stride.value_or(default_stride(tmpl)));
    const auto best = std::max_element(scores.begin(), scores.end(),
                                       [](const MatchResult& a, const MatchResult& b) { return a.score < b.score; });
    if (best->matched)
        return Decision::forward(Reason::GestureMatched, best->score);
    return Decision::reject(Reason::NoGesture, best->score);
}

} // namespace

Decision decide(const AccessRequest& req, const GesturePolicy* policy, const GestureTemplate* tmpl,
                const SensorContext& sensors, const ProxDetector& prox, const EngineOptions& opts) {
    if (!policy || policy->kind == ProtectionKind::Unprotected)
        return Decision::forward(Reason::Unprotected);
    if (policy->kind == ProtectionKind::UserIndependentProx) {
        if (prox.is_unlocked(req.t))
            return Decision::forward(Reason::WithinUnlockWindow);
        return Decision::reject(Reason::NoGesture);
    }
    if (!tmpl)
        return Decision::reject(Reason::TemplateMissing);
    return decide_tap(req, *policy, *tmpl, sensors, opts);
}

Decision check_permission(const AccessRequest& req, const GestureDatabase& db, const SensorContext& sensors,
                          const ProxDetector& prox, const EngineOptions& opts) {
    const auto* policy = db.find_policy(req.service);
    const GestureTemplate* tmpl = nullptr;
    if (policy && policy->template_id)
        tmpl = db.find_template(*policy->template_id);
    return decide(req, policy, tmpl, sensors, prox, opts);
}

std::string format_decision_line(const DecisionRecord& rec) {
    std::string line = std::to_string(rec.request.t);
    line += ',';
    line += rec.request.app_id;
    line += ',';
    line += rec.request.service;
    line += ',';
    line += to_string(rec.decision.outcome);
    line += ',';
    line += to_string(rec.decision.reason);
    line += ',';
    if (rec.decision.score)
        line += format_real(*rec.decision.score);
    return line;
}

PermissionEngine::PermissionEngine(const GestureDatabase& db, ProxConfig prox_cfg, EngineOptions opts)
    : db_(db), prox_(prox_cfg), opts_(opts) {}

std::optional<UnlockWindow> PermissionEngine::on_prox_change(Millis t) {
    if (clock_ && t < *clock_)
        throw std::invalid_argument("proximity change at " + std::to_string(t) + " ms is in the past");
    clock_ = t;
    return prox_.on_change(t);
}

Decision PermissionEngine::handle(const AccessRequest& req, const SensorContext& sensors) {
    if (req.app_id.empty() || req.service.empty())
        throw std::invalid_argument("access request needs an app id and a service");
    const auto bad = [](const std::string& s) { return s.find_first_of(",\r\n") != std::string::npos; };
    if (bad(req.app_id) || bad(req.service))
        throw std::invalid_argument("app id and service must not contain commas or line breaks");
    if (clock_ && req.t < *clock_)
        throw std::invalid_argument("request at " + std::to_string(req.t) + " ms is in the past");
    clock_ = req.t;
    auto decision = check_permission(req, db_, sensors, prox_, opts_);
    log_.push_back({req, decision});
    return decision;
}

} // namespace twr
