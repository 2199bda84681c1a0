#include "cli.hpp"

#include "ipnv/error.hpp"

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <set>
#include <thread>

namespace ipnv::cli {

struct BundleServer::Impl {
    std::filesystem::path bundle_dir;
    std::optional<std::filesystem::path> assets_dir;
    std::vector<std::string> files;
    std::string manifest;
    httplib::Server server;
    std::atomic<bool> stop_requested{false};
    std::atomic<bool> listen_entered{false};
    std::atomic<bool> listen_returned{false};
};

BundleServer::BundleServer(std::filesystem::path bundle_dir, std::optional<std::filesystem::path> assets_dir)
    : impl_(std::make_unique<Impl>())
{
    const ScenarioBundle bundle = load_bundle(bundle_dir);
    impl_->bundle_dir = std::move(bundle_dir);
    impl_->assets_dir = std::move(assets_dir);
    impl_->files = bundle_file_names(bundle.config);

    nlohmann::ordered_json manifest;
    manifest["files"] = impl_->files;
    manifest["config"] = nlohmann::ordered_json::parse(read_file(impl_->bundle_dir / std::string(kConfigFile)));
    impl_->manifest = manifest.dump(2) + "\n";

    auto& svr = impl_->server;
    // SO_REUSEADDR only: SO_REUSEPORT would let a second server share a busy port.
    svr.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    svr.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                             {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                             {"Access-Control-Allow-Headers", "Content-Type"}});

    if (impl_->assets_dir) {
        if (!svr.set_mount_point("/viewer", impl_->assets_dir->string())) {
            throw IoError("viewer assets directory not found: " + impl_->assets_dir->string());
        }
    }

    svr.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    svr.Get("/api/bundle", [this](const httplib::Request&, httplib::Response& res) {
        res.set_content(impl_->manifest, "application/json");
    });

    svr.Get("/", [this](const httplib::Request&, httplib::Response& res) {
        if (impl_->assets_dir) {
            res.set_redirect("/viewer/");
            return;
        }
        res.set_content(impl_->manifest, "application/json");
    });

    const std::set<std::string> served(impl_->files.begin(), impl_->files.end());
    svr.Get(R"(/([^/]+))", [this, served](const httplib::Request& req, httplib::Response& res) {
        const std::string name = req.matches[1];
        if (!served.contains(name)) {
            res.status = 404;
            res.set_content("not found\n", "text/plain");
            return;
        }
        try {
            res.set_content(read_file(impl_->bundle_dir / name), "application/json");
        } catch (const IoError& e) {
            res.status = 500;
            res.set_content(std::string(e.what()) + "\n", "text/plain");
        }
    });

    svr.set_logger([](const httplib::Request& req, const httplib::Response& res) {
        spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
    });
}

BundleServer::~BundleServer()
{
    impl_->server.stop();
}

int BundleServer::bind(const std::string& host, int port)
{
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) {
            throw IoError("cannot bind " + host);
        }
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port)) {
        throw IoError("cannot bind " + host + ":" + std::to_string(port) + " (port in use?)");
    }
    return port;
}

void BundleServer::listen()
{
    impl_->listen_entered = true;
    if (!impl_->stop_requested) {
        impl_->server.listen_after_bind();
    }
    impl_->listen_returned = true;
}

void BundleServer::stop()
{
    // httplib ignores stop() until the accept loop runs, so wait for it when listen() has begun.
    impl_->stop_requested = true;
    if (impl_->listen_entered) {
        while (!impl_->server.is_running() && !impl_->listen_returned) {
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
        }
    }
    impl_->server.stop();
}

std::string BundleServer::manifest_json() const
{
    return impl_->manifest;
}

} // namespace ipnv::cli
