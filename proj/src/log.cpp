#include "vpfp/log.hpp"

#include <iostream>
#include <mutex>

namespace vpfp {

namespace {
std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}
LogSink& sink_ref() {
  static LogSink s = [](const std::string& msg) { std::cerr << "vpfp: " << msg << '\n'; };
  return s;
}
}  // namespace

void set_log_sink(LogSink sink) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  sink_ref() = sink ? std::move(sink) : [](const std::string&) {};
}

void log_message(const std::string& msg) {
  std::lock_guard<std::mutex> lock(sink_mutex());
  sink_ref()(msg);
}

}  // namespace vpfp
