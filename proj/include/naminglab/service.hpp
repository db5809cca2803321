#pragma once

// Naming service: serves activation data and persists namings with optimistic versioning.
// `Service::handle` is transport independent; http_server.hpp binds it to HTTP.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "naminglab/core.hpp"
#include "naminglab/metrics.hpp"
#include "naminglab/significance.hpp"

namespace naminglab {

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    json body;
};

namespace detail {

struct HttpError {
    int status;
    std::string message;
    std::vector<std::string> violations;
};

[[noreturn]] inline void fail(int status, std::string message, std::vector<std::string> violations = {}) {
    throw HttpError{status, std::move(message), std::move(violations)};
}

inline std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : path) {
        if (c == '/') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline bool safe_segment(const std::string& s) {
    return !s.empty() && s != "." && s != ".." && s.find_first_of("/\\") == std::string::npos;
}

} // namespace detail

class Service {
public:
    Service(TestSet testset, std::filesystem::path naming_dir)
        : testset_(std::move(testset)), naming_dir_(std::move(naming_dir)) {
        for (const auto& c : testset_.categories) significance_.emplace(c, significant_sets(testset_, c));
    }

    const TestSet& testset() const { return testset_; }
    const ClassSignificance& significance(const std::string& class_id) const {
        auto it = significance_.find(class_id);
        if (it == significance_.end()) throw UnknownClass("unknown class " + class_id);
        return it->second;
    }

    std::filesystem::path naming_path(const std::string& annotator, const std::string& class_id) const {
        return naming_dir_ / annotator / (class_id + ".json");
    }

    ApiResponse handle(const ApiRequest& req) {
        try {
            return route(req);
        } catch (const detail::HttpError& e) {
            json body = {{"error", e.message}};
            if (!e.violations.empty()) body["violations"] = e.violations;
            return {e.status, body};
        } catch (const ConsistencyError& e) {
            return {422, {{"error", "invariant violation"}, {"violations", e.violations()}}};
        } catch (const SchemaError& e) {
            return {422, {{"error", e.what()}, {"violations", json::array({e.what()})}}};
        } catch (const Error& e) {
            return {422, {{"error", e.what()}}};
        }
    }

    // Current stored naming, or an empty version-0 naming.
    Naming naming(const std::string& annotator, const std::string& class_id) {
        auto s = slot(annotator, class_id);
        std::lock_guard lock(s->mutex);
        return s->naming;
    }

private:
    struct Slot {
        std::mutex mutex;
        Naming naming;
    };

    ApiResponse route(const ApiRequest& req) {
        const auto seg = detail::split_path(req.path);
        const std::string& m = req.method;
        for (const auto& s : seg)
            if (!detail::safe_segment(s)) detail::fail(404, "no such resource " + req.path);

        if (m == "GET" && seg.size() == 1 && seg[0] == "categories") return categories();
        if (m == "GET" && seg.size() == 3 && seg[0] == "categories" && seg[2] == "activations") {
            auto it = req.query.find("annotator");
            return activations(seg[1], it == req.query.end() ? std::optional<std::string>{} : it->second);
        }
        if (seg.size() == 3 && seg[0] == "namings") {
            require_class(seg[2]);
            if (m == "GET") return {200, to_json(naming(seg[1], seg[2]))};
            if (m == "PUT") return put_naming(seg[1], seg[2], req.body);
        }
        if (m == "POST" && seg.size() == 4 && seg[0] == "namings" && seg[3] == "ops") {
            require_class(seg[2]);
            return apply_op(seg[1], seg[2], req.body);
        }
        if (m == "GET" && seg.size() == 3 && seg[0] == "stats") {
            require_class(seg[2]);
            return stats(seg[1], seg[2]);
        }
        detail::fail(404, "no such resource " + m + " " + req.path);
    }

    void require_class(const std::string& class_id) const {
        if (!testset_.has_category(class_id)) detail::fail(404, "unknown class " + class_id);
    }

    std::shared_ptr<Slot> slot(const std::string& annotator, const std::string& class_id) {
        std::lock_guard lock(slots_mutex_);
        auto& s = slots_[{annotator, class_id}];
        if (!s) {
            auto fresh = std::make_shared<Slot>();
            const auto path = naming_path(annotator, class_id);
            if (std::filesystem::exists(path)) {
                fresh->naming = load_naming(path.string());
            } else {
                fresh->naming.annotator_id = annotator;
                fresh->naming.class_id = class_id;
            }
            s = std::move(fresh);
        }
        return s;
    }

    void persist(const Naming& n) const {
        const auto path = naming_path(n.annotator_id, n.class_id);
        std::filesystem::create_directories(path.parent_path());
        const auto tmp = path.string() + ".tmp";
        write_file(tmp, to_json(n).dump(2) + "\n");
        std::filesystem::rename(tmp, path);
    }

    void check(const Naming& n) const {
        auto v = structural_violations(n);
        auto s = significance_violations(n, significance(n.class_id));
        v.insert(v.end(), s.begin(), s.end());
        if (!v.empty()) detail::fail(422, "invariant violation", std::move(v));
    }

    ApiResponse categories() const {
        json arr = json::array();
        for (const auto& c : testset_.categories) {
            const auto& cs = significance_.at(c);
            arr.push_back({{"class_id", c}, {"image_count", cs.image_count}, {"significant_count", cs.total}});
        }
        return {200, {{"categories", arr}}};
    }

    ApiResponse activations(const std::string& class_id, const std::optional<std::string>& annotator) {
        require_class(class_id);
        std::map<ActivationRef, std::string> owner;
        ActivationSet discarded;
        if (annotator) {
            if (!detail::safe_segment(*annotator)) detail::fail(404, "unknown annotator");
            const Naming n = naming(*annotator, class_id);
            for (const auto& c : n.concepts)
                for (const auto& a : c.members) owner[a] = c.concept_id;
            discarded = n.discarded;
        }
        json arr = json::array();
        for (const auto& s : significance_.at(class_id).sets) {
            const auto* rec = testset_.find(s.image_id, class_id);
            for (int f : s.features) {
                const ActivationRef a{s.image_id, class_id, f};
                const auto fi = static_cast<std::size_t>(f);
                json j = to_json(a);
                j["contribution"] = rec->contributions[fi];
                j["heatmap_url"] = rec->heatmap_paths.empty() ? json(nullptr)
                                                              : json("/heatmaps/" + rec->heatmap_paths[fi]);
                if (auto it = owner.find(a); it != owner.end()) {
                    j["status"] = "named";
                    j["concept_id"] = it->second;
                } else {
                    j["status"] = discarded.contains(a) ? "discarded" : "unnamed";
                    j["concept_id"] = nullptr;
                }
                arr.push_back(std::move(j));
            }
        }
        return {200, {{"class_id", class_id}, {"activations", arr}}};
    }

    ApiResponse put_naming(const std::string& annotator, const std::string& class_id, const std::string& body) {
        Naming incoming = naming_from_json(detail::parse_text(body, "naming"));
        if (incoming.annotator_id != annotator || incoming.class_id != class_id)
            detail::fail(422, "document keys do not match the resource",
                         {"annotator_id/class_id must be " + annotator + "/" + class_id});
        auto s = slot(annotator, class_id);
        std::lock_guard lock(s->mutex);
        if (incoming.version != s->naming.version)
            detail::fail(409, "version conflict: stored version is " + std::to_string(s->naming.version));
        check(incoming);
        incoming.version = s->naming.version + 1;
        persist(incoming);
        s->naming = std::move(incoming);
        return {200, to_json(s->naming)};
    }

    ApiResponse stats(const std::string& annotator, const std::string& class_id) {
        const Naming n = naming(annotator, class_id);
        const auto& cs = significance(class_id);
        if (cs.total == 0) detail::fail(422, "class " + class_id + " has no significant activations");
        const auto named = named_set(n);
        const auto t = coverage_of(named, cs);
        std::size_t named_sig = 0;
        for (const auto& a : cs.activations()) named_sig += named.contains(a) ? 1 : 0;
        return {200,
                {{"annotator_id", annotator},
                 {"class_id", class_id},
                 {"version", n.version},
                 {"significant", cs.total},
                 {"named", named_sig},
                 {"concept_count", n.concepts.size()},
                 {"activation_coverage", t.activation_coverage},
                 {"partial_coverage", t.partial_coverage},
                 {"complete_coverage", t.complete_coverage}}};
    }

    static ActivationSet members_of(const json& body, const char* key, const std::string& class_id) {
        if (!body.contains(key)) return {};
        const auto& arr = body.at(key);
        if (!arr.is_array()) detail::fail(422, std::string("\"") + key + "\" must be an array");
        ActivationSet out;
        std::size_t i = 0;
        for (const auto& j : arr) {
            auto a = activation_from_json(j, std::string(key) + "[" + std::to_string(i++) + "]");
            if (a.class_id != class_id) detail::fail(422, "member " + to_string(a) + " is not in class " + class_id);
            out.insert(std::move(a));
        }
        return out;
    }

    static std::string string_field(const json& body, const char* key) {
        if (!body.contains(key) || !body.at(key).is_string())
            detail::fail(422, std::string("op requires string \"") + key + "\"");
        return body.at(key).get<std::string>();
    }

    // Removes the activations from every concept and from the discarded pool.
    static void detach(Naming& n, const ActivationSet& acts) {
        for (auto& c : n.concepts)
            for (const auto& a : acts) c.members.erase(a);
        for (const auto& a : acts) n.discarded.erase(a);
    }

    static VisualConcept& concept_ref(Naming& n, const std::string& id) {
        auto* c = n.find_concept(id);
        if (!c) detail::fail(404, "unknown concept " + id);
        return *c;
    }

    ApiResponse apply_op(const std::string& annotator, const std::string& class_id, const std::string& text) {
        const json body = detail::parse_text(text, "op");
        if (!body.is_object()) detail::fail(422, "op body must be an object");
        const std::string op = string_field(body, "op");

        auto s = slot(annotator, class_id);
        std::lock_guard lock(s->mutex);
        if (body.contains("version")) {
            if (!body.at("version").is_number_integer()) detail::fail(422, "version must be an integer");
            if (body.at("version").get<std::int64_t>() != s->naming.version)
                detail::fail(409, "version conflict: stored version is " + std::to_string(s->naming.version));
        }

        Naming n = s->naming;
        const auto members = members_of(body, "members", class_id);
        if (op == "create_concept") {
            std::string id;
            if (body.contains("concept_id")) {
                id = string_field(body, "concept_id");
            } else {
                std::size_t k = n.concepts.size() + 1;
                while (n.find_concept("c" + std::to_string(k))) ++k;
                id = "c" + std::to_string(k);
            }
            if (id.empty() || n.find_concept(id)) detail::fail(422, "concept " + id + " already exists", {"duplicate concept_id " + id});
            detach(n, members);
            n.concepts.push_back({id, body.contains("name") ? string_field(body, "name") : "", members});
        } else if (op == "rename") {
            concept_ref(n, string_field(body, "concept_id")).name = string_field(body, "name");
        } else if (op == "move_members") {
            const json& to = body.contains("to") ? body.at("to") : json(nullptr);
            if (!to.is_null() && !to.is_string()) detail::fail(422, "\"to\" must be a concept id or null");
            if (to.is_string()) concept_ref(n, to.get<std::string>());
            detach(n, members);
            if (to.is_string()) concept_ref(n, to.get<std::string>()).members.insert(members.begin(), members.end());
        } else if (op == "merge") {
            const std::string into = string_field(body, "into");
            std::vector<std::string> from;
            if (body.contains("from") && body.at("from").is_array()) {
                for (const auto& f : body.at("from"))
                    if (f.is_string()) from.push_back(f.get<std::string>());
            } else {
                from.push_back(string_field(body, "from"));
            }
            concept_ref(n, into);
            for (const auto& f : from) {
                if (f == into) detail::fail(422, "cannot merge a concept into itself");
                auto moved = concept_ref(n, f).members;
                std::erase_if(n.concepts, [&](const VisualConcept& c) { return c.concept_id == f; });
                concept_ref(n, into).members.insert(moved.begin(), moved.end());
            }
        } else if (op == "discard") {
            detach(n, members);
            n.discarded.insert(members.begin(), members.end());
        } else if (op == "restore") {
            for (const auto& a : members) n.discarded.erase(a);
        } else {
            detail::fail(422, "unknown op " + op);
        }

        check(n);
        n.version = s->naming.version + 1;
        persist(n);
        s->naming = std::move(n);
        return {200, to_json(s->naming)};
    }

    const TestSet testset_;
    std::map<std::string, ClassSignificance> significance_;
    std::filesystem::path naming_dir_;
    std::mutex slots_mutex_;
    std::map<std::pair<std::string, std::string>, std::shared_ptr<Slot>> slots_;
};

} // namespace naminglab
