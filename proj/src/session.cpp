#include "starcut/session.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "starcut/error.hpp"
#include "starcut/evaluation.hpp"
#include "starcut/outputs.hpp"

namespace starcut {

using nlohmann::json;

namespace {

json params_to_json(const SegmentParams& p) {
  return {{"ray_count", p.ray_count}, {"nodes_per_ray", p.nodes_per_ray}, {"max_radius", p.max_radius},
          {"rho", p.rho},             {"delta_r", p.delta_r},             {"edge_window", p.edge_window}};
}

SegmentParams params_from_json(const json& j) {
  SegmentParams p;
  p.ray_count = j.value("ray_count", p.ray_count);
  p.nodes_per_ray = j.value("nodes_per_ray", p.nodes_per_ray);
  p.max_radius = j.value("max_radius", p.max_radius);
  p.rho = j.value("rho", p.rho);
  p.delta_r = j.value("delta_r", p.delta_r);
  p.edge_window = j.value("edge_window", p.edge_window);
  return p;
}

Error protocol_error(const std::string& reason, const std::string& detail) {
  return Error(ErrorKind::protocol, reason, detail);
}

Point2D point_field(const json& msg) {
  if (!msg.contains("x") || !msg.contains("y") || !msg["x"].is_number() || !msg["y"].is_number()) {
    throw protocol_error("malformed-message", "numeric x and y are required");
  }
  return {msg["x"].get<double>(), msg["y"].get<double>()};
}

json point_json(Point2D p) { return json::array({p.x, p.y}); }

}  // namespace

std::string session_log_to_json(const SessionLog& log) {
  json events = json::array();
  for (const auto& e : log.events) {
    events.push_back({{"t_ms", e.timestamp_ms}, {"kind", e.kind}, {"payload", json::parse(e.payload_json)}});
  }
  json j = {{"lesion_id", log.lesion_id},
            {"image", log.image},
            {"params", params_to_json(log.params)},
            {"events", events},
            {"satisfied", log.satisfied},
            {"total_interaction_ms", log.total_interaction_ms}};
  return j.dump();
}

SessionLog session_log_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw input_error("format-error", "session log is not a JSON object");
  try {
    SessionLog log;
    log.lesion_id = j.at("lesion_id").get<std::string>();
    log.image = j.at("image").get<std::string>();
    log.params = params_from_json(j.value("params", json::object()));
    for (const auto& e : j.at("events")) {
      log.events.push_back({e.at("t_ms").get<double>(), e.at("kind").get<std::string>(), e.at("payload").dump()});
    }
    log.satisfied = j.at("satisfied").get<bool>();
    log.total_interaction_ms = j.at("total_interaction_ms").get<double>();
    return log;
  } catch (const json::exception& ex) {
    throw input_error("format-error", std::string("session log: ") + ex.what());
  }
}

SeedInput final_seed_input(const SessionLog& log) {
  SeedInput input;
  bool seeded = false;
  for (const auto& e : log.events) {
    if (e.kind == "finalize") break;
    if (e.kind == "set_seed" || e.kind == "drag_seed") {
      input.seed = point_field(json::parse(e.payload_json));
      seeded = true;
    } else if (e.kind == "add_helper") {
      input.helpers.push_back(point_field(json::parse(e.payload_json)));
    } else if (e.kind == "clear_helpers") {
      input.helpers.clear();
    }
  }
  if (!seeded) throw input_error("no-seed", "session log contains no seed placement");
  return input;
}

SegmentationResult replay_session(const SessionLog& log) {
  const GrayImage img = load_image(log.image);
  return segment(img, final_seed_input(log), log.params);
}

struct Session::State {
  struct Lesion {
    SessionLog log;
    GrayImage image;
    std::optional<BinaryMask> manual;
    std::optional<double> time_manual;
    std::optional<Point2D> seed;
    std::vector<Point2D> helpers;
    std::optional<SegmentationResult> latest;
    std::optional<double> first_seed_ms;
  };

  SessionConfig config;
  std::optional<Lesion> lesion;
  std::vector<SessionLog> finished;
  double last_ms = 0.0;
  int lesion_counter = 0;

  double stamp(const json& msg, double received_ms) {
    double t = received_ms;
    if (msg.contains("t_ms") && msg["t_ms"].is_number()) t = msg["t_ms"].get<double>();
    last_ms = std::max(last_ms, t);
    return last_ms;
  }

  void record(const std::string& kind, const json& msg, double t) {
    json payload = msg;
    payload.erase("id");
    payload.erase("t_ms");
    payload.erase("type");
    lesion->log.events.push_back({t, kind, payload.dump()});
  }

  Lesion& require_lesion() {
    if (!lesion) throw protocol_error("no-image", "load an image first");
    return *lesion;
  }

  json contour_reply() {
    Lesion& l = *lesion;
    if (!l.seed) return {{"type", "state"}, {"helpers", l.helpers.size()}};
    l.latest.reset();
    l.latest = segment(l.image, {*l.seed, l.helpers}, config.params);
    const SegmentationResult& r = *l.latest;
    json vertices = json::array();
    for (const auto& v : r.contour.vertices()) vertices.push_back(point_json(v));
    json reply = {{"type", "contour"},
                  {"seed", point_json(*l.seed)},
                  {"helpers", l.helpers.size()},
                  {"vertices", vertices},
                  {"cut_index", r.cut_index},
                  {"diameter_a", r.diameters.a},
                  {"diameter_b", r.diameters.b},
                  {"endpoints_a", {point_json(r.diameters.endpoints_a.first), point_json(r.diameters.endpoints_a.second)}},
                  {"endpoints_b", {point_json(r.diameters.endpoints_b.first), point_json(r.diameters.endpoints_b.second)}},
                  {"compute_ms", r.elapsed_seconds * 1000.0},
                  {"warnings", r.warnings}};
    if (r.diameter_a_mm) {
      reply["diameter_a_mm"] = *r.diameter_a_mm;
      reply["diameter_b_mm"] = *r.diameter_b_mm;
    }
    return reply;
  }

  json handle_load(const json& msg, double t) {
    if (!msg.contains("path") || !msg["path"].is_string()) throw protocol_error("malformed-message", "path is required");
    const std::string path = msg["path"].get<std::string>();
    GrayImage image = load_image(path);
    std::optional<BinaryMask> manual;
    if (msg.contains("manual_mask") && msg["manual_mask"].is_string()) {
      manual = load_mask(msg["manual_mask"].get<std::string>());
      if (manual->width() != image.width() || manual->height() != image.height()) {
        throw input_error("dimension-mismatch", "manual mask does not match the image size");
      }
    }
    ++lesion_counter;
    std::string id = msg.contains("lesion_id") && msg["lesion_id"].is_string() ? msg["lesion_id"].get<std::string>()
                                                                                 : "lesion_" + std::to_string(lesion_counter);
    lesion.reset();
    lesion.emplace(Lesion{SessionLog{id, path, config.params, {}, false, 0.0}, std::move(image), std::move(manual),
                          std::nullopt, std::nullopt, {}, std::nullopt, std::nullopt});
    if (msg.contains("time_manual") && msg["time_manual"].is_number()) lesion->time_manual = msg["time_manual"].get<double>();
    record("load", msg, t);
    json reply = {{"type", "image"},
                  {"lesion_id", id},
                  {"width", lesion->image.width()},
                  {"height", lesion->image.height()}};
    if (auto s = lesion->image.spacing_mm()) reply["spacing_mm"] = *s;
    return reply;
  }

  json handle_finalize(const json& msg, double t) {
    Lesion& l = require_lesion();
    if (!msg.contains("satisfied") || !msg["satisfied"].is_boolean()) {
      throw protocol_error("malformed-message", "boolean satisfied is required");
    }
    record("finalize", msg, t);
    l.log.satisfied = msg["satisfied"].get<bool>();
    l.log.total_interaction_ms = l.first_seed_ms ? t - *l.first_seed_ms : 0.0;

    json reply = {{"type", "finalized"},
                  {"lesion_id", l.log.lesion_id},
                  {"satisfied", l.log.satisfied},
                  {"total_interaction_ms", l.log.total_interaction_ms},
                  {"time_semi", l.log.total_interaction_ms / 1000.0}};
    if (l.latest) {
      const SegmentationResult& r = *l.latest;
      reply["compute_ms"] = r.elapsed_seconds * 1000.0;
      reply["diameter_a"] = r.diameters.a;
      reply["diameter_b"] = r.diameters.b;
      if (l.manual) {
        reply["dsc"] = dice(*l.manual, r.mask);
        reply["hd"] = mask_area(r.mask) && mask_area(*l.manual) ? json(hausdorff(*l.manual, r.mask)) : json();
      }
      if (l.time_manual) reply["time_manual"] = *l.time_manual;
      if (config.output_dir) {
        write_segmentation(r, {*l.seed, l.helpers}, config.params, l.log.image, *config.output_dir / l.log.lesion_id);
      }
    }
    if (config.log_path) {
      std::ofstream out(*config.log_path, std::ios::app);
      if (!out) throw input_error("io-error", "cannot append session log " + config.log_path->string());
      out << session_log_to_json(l.log) << '\n';
    }
    finished.push_back(std::move(l.log));
    lesion.reset();
    return reply;
  }

  json dispatch(const json& msg, double received_ms) {
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
      throw protocol_error("malformed-message", "expected a JSON object with a string \"type\"");
    }
    const std::string type = msg["type"].get<std::string>();
    const double t = stamp(msg, received_ms);
    if (type == "load_image") return handle_load(msg, t);
    if (type == "finalize") return handle_finalize(msg, t);
    if (type == "set_seed" || type == "drag_seed") {
      Lesion& l = require_lesion();
      const Point2D p = point_field(msg);
      record(type, msg, t);
      l.seed = p;
      if (!l.first_seed_ms) l.first_seed_ms = t;
      return contour_reply();
    }
    if (type == "add_helper") {
      Lesion& l = require_lesion();
      const Point2D p = point_field(msg);
      record(type, msg, t);
      l.helpers.push_back(p);
      return contour_reply();
    }
    if (type == "clear_helpers") {
      Lesion& l = require_lesion();
      record(type, msg, t);
      l.helpers.clear();
      return contour_reply();
    }
    throw protocol_error("unknown-type", "unsupported message type '" + type + "'");
  }
};

Session::Session(SessionConfig config) : state_(std::make_unique<State>()) { state_->config = std::move(config); }
Session::~Session() = default;
Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

std::string Session::handle_line(const std::string& line, double received_ms) {
  json msg = json::parse(line, nullptr, false);
  json reply;
  try {
    if (msg.is_discarded()) throw protocol_error("malformed-message", "request is not valid JSON");
    reply = state_->dispatch(msg, received_ms);
  } catch (const Error& e) {
    reply = {{"type", "error"}, {"reason", e.reason()}, {"message", e.what()}};
  } catch (const std::exception& e) {
    reply = {{"type", "error"}, {"reason", "internal-error"}, {"message", e.what()}};
  }
  if (msg.is_object() && msg.contains("id")) reply["id"] = msg["id"];
  return reply.dump();
}

void Session::record_skipped(const std::string& line, double received_ms) {
  json msg = json::parse(line, nullptr, false);
  if (msg.is_discarded() || !state_->lesion) return;
  try {
    const Point2D p = point_field(msg);
    const double t = state_->stamp(msg, received_ms);
    state_->record("drag_seed", msg, t);
    state_->lesion->seed = p;
    if (!state_->lesion->first_seed_ms) state_->lesion->first_seed_ms = t;
  } catch (const Error&) {
  }
}

const std::vector<SessionLog>& Session::finished() const { return state_->finished; }

namespace {

class StreamChannel : public LineChannel {
 public:
  StreamChannel(std::istream& in, std::ostream& out) : in_(in), out_(out) {}

  std::optional<std::string> read_line() override {
    std::string line;
    if (!std::getline(in_, line)) return std::nullopt;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  void write_line(const std::string& line) override {
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw protocol_error("transport-error", "output stream failed");
  }

 private:
  std::istream& in_;
  std::ostream& out_;
};

class SocketChannel : public LineChannel {
 public:
  explicit SocketChannel(int fd) : fd_(fd) {}
  ~SocketChannel() override { ::close(fd_); }

  std::optional<std::string> read_line() override {
    while (true) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      char chunk[4096];
      ssize_t got = ::recv(fd_, chunk, sizeof chunk, 0);
      if (got <= 0) {
        if (buffer_.empty()) return std::nullopt;
        std::string rest;
        rest.swap(buffer_);
        return rest;
      }
      buffer_.append(chunk, static_cast<std::size_t>(got));
    }
  }

  void write_line(const std::string& line) override {
    std::string data = line + '\n';
    std::size_t sent = 0;
    while (sent < data.size()) {
      ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) throw protocol_error("transport-error", "socket send failed");
      sent += static_cast<std::size_t>(n);
    }
  }

 private:
  int fd_;
  std::string buffer_;
};

bool is_drag(const std::string& line) {
  json msg = json::parse(line, nullptr, false);
  return msg.is_object() && msg.value("type", std::string()) == "drag_seed";
}

}  // namespace

std::unique_ptr<LineChannel> make_stream_channel(std::istream& in, std::ostream& out) {
  return std::make_unique<StreamChannel>(in, out);
}

std::unique_ptr<LineChannel> make_socket_channel(int fd) { return std::make_unique<SocketChannel>(fd); }

void serve(Session& session, LineChannel& channel) {
  struct Incoming {
    std::string line;
    double received_ms;
  };
  std::mutex mutex;
  std::condition_variable ready;
  std::deque<Incoming> queue;
  bool closed = false;
  const auto start = std::chrono::steady_clock::now();

  std::thread reader([&] {
    while (auto line = channel.read_line()) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      std::lock_guard lock(mutex);
      queue.push_back({std::move(*line), ms});
      ready.notify_one();
    }
    std::lock_guard lock(mutex);
    closed = true;
    ready.notify_one();
  });

  try {
    while (true) {
      Incoming next;
      bool superseded = false;
      {
        std::unique_lock lock(mutex);
        ready.wait(lock, [&] { return !queue.empty() || closed; });
        if (queue.empty()) break;
        next = std::move(queue.front());
        queue.pop_front();
        superseded = !queue.empty() && is_drag(next.line) && is_drag(queue.front().line);
      }
      if (next.line.find_first_not_of(" \t") == std::string::npos) continue;
      if (superseded) {
        session.record_skipped(next.line, next.received_ms);
        continue;
      }
      channel.write_line(session.handle_line(next.line, next.received_ms));
    }
  } catch (...) {
    // The reader only touches locals of this frame, so it must finish before they go away.
    reader.join();
    throw;
  }
  reader.join();
}

void serve_tcp(Session& session, int port, const std::function<void(int)>& on_listen) {
  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw protocol_error("transport-error", "cannot create socket");
  int on = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &on, sizeof on);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listener, 1) != 0) {
    ::close(listener);
    throw protocol_error("transport-error", "cannot listen on port " + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  on_listen(ntohs(addr.sin_port));
  int client = ::accept(listener, nullptr, nullptr);
  ::close(listener);
  if (client < 0) throw protocol_error("transport-error", "accept failed");
  auto channel = make_socket_channel(client);
  serve(session, *channel);
}

}  // namespace starcut
