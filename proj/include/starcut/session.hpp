#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "starcut/segmenter.hpp"

namespace starcut {

/// Interaction event as recorded in a session log.
struct SessionEvent {
  double timestamp_ms = 0.0;
  /// load, set_seed, drag_seed, add_helper, clear_helpers or finalize.
  std::string kind;
  /// The request object as received, minus transport fields.
  std::string payload_json;
};

/// One lesion's interaction history, from load to finalize.
struct SessionLog {
  std::string lesion_id;
  std::string image;
  SegmentParams params;
  std::vector<SessionEvent> events;
  bool satisfied = false;
  double total_interaction_ms = 0.0;
};

std::string session_log_to_json(const SessionLog& log);
SessionLog session_log_from_json(const std::string& text);

/// Seed and helpers in effect at the log's finalize event.
SeedInput final_seed_input(const SessionLog& log);

/// Re-runs the segmentation a finished log describes.
SegmentationResult replay_session(const SessionLog& log);

struct SessionConfig {
  SegmentParams params;
  /// Finished logs are appended here as JSON lines, when set.
  std::optional<std::filesystem::path> log_path;
  /// Final masks and contours are written under <output_dir>/<lesion_id>/, when set.
  std::optional<std::filesystem::path> output_dir;
};

/// State machine behind the newline-delimited JSON protocol. Each request is one JSON object
/// with a "type" field; each handled request yields exactly one reply object. An optional "id"
/// is echoed back and an optional "t_ms" supplies the client-side timestamp.
class Session {
 public:
  explicit Session(SessionConfig config);
  ~Session();
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;

  /// Handles one request line and returns the reply line (without trailing newline).
  /// `received_ms` stamps events that carry no client timestamp.
  std::string handle_line(const std::string& line, double received_ms);

  /// Records a drag that was superseded before it was processed; no reply is produced.
  void record_skipped(const std::string& line, double received_ms);

  const std::vector<SessionLog>& finished() const;

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// Bidirectional line transport.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  /// Next line without its terminator, or nullopt at end of stream.
  virtual std::optional<std::string> read_line() = 0;
  virtual void write_line(const std::string& line) = 0;
};

/// stdin/stdout style channel over iostreams.
std::unique_ptr<LineChannel> make_stream_channel(std::istream& in, std::ostream& out);

/// Channel over a connected socket; the channel owns and closes the descriptor.
std::unique_ptr<LineChannel> make_socket_channel(int fd);

/// Runs the request loop until the channel closes. A reader thread queues incoming lines;
/// when several drag_seed requests are waiting back to back, only the newest is computed and
/// answered, the others are logged as skipped.
void serve(Session& session, LineChannel& channel);

/// Listens on 127.0.0.1:`port` (0 picks a free port), reports the bound port through
/// `on_listen`, then serves a single client connection.
void serve_tcp(Session& session, int port, const std::function<void(int)>& on_listen);

}  // namespace starcut
