#pragma once

// HTTP/1.1 binding of the naming service.

#include <string>

#include "httplib.h"

#include "naminglab/service.hpp"

namespace naminglab {

class HttpFrontend {
public:
    // `heatmap_root`: directory that dataset heatmap paths are relative to; served read-only
    // under /heatmaps/.
    HttpFrontend(Service& service, const std::string& heatmap_root = {}) : service_(service) {
        if (!heatmap_root.empty()) server_.set_mount_point("/heatmaps", heatmap_root);
        auto forward = [this](const char* method) {
            return [this, method](const httplib::Request& req, httplib::Response& res) {
                ApiRequest r{method, req.path, {}, req.body};
                for (const auto& [k, v] : req.params) r.query.emplace(k, v);
                const ApiResponse out = service_.handle(r);
                res.status = out.status;
                res.set_content(out.body.dump(), "application/json; charset=utf-8");
            };
        };
        server_.Get(".*", forward("GET"));
        server_.Put(".*", forward("PUT"));
        server_.Post(".*", forward("POST"));
    }

    // Binds to `port` (0 picks a free port) and returns the bound port, or -1.
    int bind(const std::string& host, int port) {
        if (port == 0) return server_.bind_to_any_port(host);
        return server_.bind_to_port(host, port) ? port : -1;
    }

    // Blocks serving requests until stop().
    bool serve() { return server_.listen_after_bind(); }

    void stop() { server_.stop(); }

    void wait_until_ready() const { server_.wait_until_ready(); }

private:
    Service& service_;
    httplib::Server server_;
};

} // namespace naminglab
