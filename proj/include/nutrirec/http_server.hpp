#pragma once

// cpp-httplib binding for ApiRouter.

#include <memory>
#include <string>

#include "httplib.h"
#include "nutrirec/service.hpp"

namespace nutrirec {

inline void mount_routes(httplib::Server& server, ApiRouter& router) {
    auto handler = [&router](const httplib::Request& req, httplib::Response& res) {
        ApiRequest api;
        api.method = req.method;
        api.path = req.path;
        api.body = req.body;
        for (const auto& [k, v] : req.params) api.query[k] = v;
        const ApiResponse out = router.handle(api);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    server.Get(".*", handler);
    server.Post(".*", handler);
    server.Put(".*", handler);
}

/// Blocks serving on host:port until the server is stopped.
inline bool serve(NutritionService& service, const std::string& host, int port) {
    ApiRouter router(service);
    httplib::Server server;
    mount_routes(server, router);
    return server.listen(host, port);
}

}  // namespace nutrirec
