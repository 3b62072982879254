#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "council/council.hpp"
#include "council/sse.hpp"

namespace council {

namespace detail {

/// Frame queue bridging the background council run to the SSE endpoint.
struct SessionChannel {
  std::mutex mutex;
  std::condition_variable cv;
  std::deque<std::string> frames;  // pre-formatted SSE frames
  bool finished = false;

  void push(std::string frame) {
    {
      std::lock_guard<std::mutex> lock(mutex);
      frames.push_back(std::move(frame));
    }
    cv.notify_all();
  }

  void finish() {
    {
      std::lock_guard<std::mutex> lock(mutex);
      finished = true;
    }
    cv.notify_all();
  }

  /// Pop the next frame, a heartbeat comment if 15s pass idle, or empty
  /// string once drained and finished.
  std::string pop() {
    std::unique_lock<std::mutex> lock(mutex);
    if (!cv.wait_for(lock, std::chrono::seconds(15),
                     [&] { return !frames.empty() || finished; }))
      return sse_heartbeat();
    if (frames.empty()) return {};
    std::string frame = std::move(frames.front());
    frames.pop_front();
    return frame;
  }
};

}  // namespace detail

/// HTTP front end:
///   POST /council                   {"query": ..., "history": [...]}
///                                   -> {"session_id": "..."}
///   GET  /council/<id>/events       SSE stream, closes after the terminal
///                                   event (final_report or council_error)
class CouncilServer {
 public:
  explicit CouncilServer(CouncilSetup setup) : setup_(std::move(setup)) {
    setup_.validate();
    server_.Post("/council", [this](const httplib::Request& req, httplib::Response& res) {
      handle_submit(req, res);
    });
    server_.Get(R"(/council/([A-Za-z0-9\-]+)/events)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  handle_events(req, res);
                });
  }

  ~CouncilServer() { stop(); }

  bool listen(const std::string& host, int port) { return server_.listen(host, port); }
  bool bind_to_port(const std::string& host, int port) {
    return server_.bind_to_port(host, port);
  }
  bool listen_after_bind() { return server_.listen_after_bind(); }

  void stop() {
    server_.stop();
    std::vector<std::thread> pending;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      pending.swap(workers_);
    }
    for (auto& worker : pending)
      if (worker.joinable()) worker.join();
  }

 private:
  void handle_submit(const httplib::Request& req, httplib::Response& res) {
    std::string query;
    Session history;
    try {
      const auto body = nlohmann::json::parse(req.body);
      query = body.at("query").get<std::string>();
      if (body.contains("history")) {
        for (const auto& turn : body.at("history")) {
          history.turns.push_back({turn.at("role").get<std::string>(),
                                   turn.at("content").get<std::string>()});
        }
      }
    } catch (const nlohmann::json::exception& e) {
      res.status = 400;
      res.set_content(nlohmann::json{{"error", std::string("bad request: ") + e.what()}}.dump(),
                      "application/json");
      return;
    }

    const std::string session_id = "s-" + std::to_string(next_session_.fetch_add(1));
    auto channel = std::make_shared<detail::SessionChannel>();
    {
      std::lock_guard<std::mutex> lock(mutex_);
      channels_[session_id] = channel;
    }

    std::thread worker([this, query, history, session_id, channel] {
      try {
        stream_council(query, history, setup_, session_id,
                       [&](const SseEvent& event) { channel->push(format_sse(event)); });
      } catch (...) {
        // stream_council already emitted council_error before rethrowing.
      }
      channel->finish();
    });
    {
      std::lock_guard<std::mutex> lock(mutex_);
      workers_.push_back(std::move(worker));
    }

    res.status = 202;
    res.set_content(nlohmann::json{{"session_id", session_id}}.dump(), "application/json");
  }

  void handle_events(const httplib::Request& req, httplib::Response& res) {
    std::shared_ptr<detail::SessionChannel> channel;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      const auto it = channels_.find(req.matches[1]);
      if (it != channels_.end()) channel = it->second;
    }
    if (!channel) {
      res.status = 404;
      res.set_content(nlohmann::json{{"error", "unknown session"}}.dump(), "application/json");
      return;
    }
    res.set_chunked_content_provider(
        "text/event-stream", [channel](std::size_t, httplib::DataSink& sink) {
          const std::string frame = channel->pop();
          if (frame.empty()) {
            sink.done();
            return false;
          }
          sink.write(frame.data(), frame.size());
          return true;
        });
  }

  CouncilSetup setup_;
  httplib::Server server_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<detail::SessionChannel>> channels_;
  std::vector<std::thread> workers_;
  std::atomic<std::uint64_t> next_session_{1};
};

}  // namespace council
