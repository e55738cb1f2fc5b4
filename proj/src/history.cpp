#include "bpaxos/history.hpp"

#include <sstream>

namespace bpaxos {

namespace {

struct Printer {
  std::ostringstream& os;

  void operator()(const InvokeEvent& e) const {
    os << "ev=invoke client=" << e.client << " seq=" << e.seq << " cmd=" << to_string(e.cmd);
  }
  void operator()(const CompleteEvent& e) const {
    os << "ev=complete client=" << e.client << " seq=" << e.seq << " out=" << to_string(e.output)
       << " latency=" << e.latency;
  }
  void operator()(const ProposeEvent& e) const {
    os << "ev=propose proposer=" << to_string(e.proposer) << " v=" << to_string(e.v)
       << " value=" << to_string(e.proposal);
  }
  void operator()(const ChosenEvent& e) const {
    os << "ev=chosen proposer=" << to_string(e.proposer) << " v=" << to_string(e.v)
       << " value=" << to_string(e.proposal);
  }
  void operator()(const CommitEvent& e) const {
    os << "ev=commit replica=" << e.replica << " v=" << to_string(e.v)
       << " value=" << to_string(e.proposal);
  }
  void operator()(const ExecuteEvent& e) const {
    os << "ev=execute replica=" << e.replica << " v=" << to_string(e.v) << " pos=" << e.position
       << " slot=" << e.slot << " cmd=" << to_string(e.cmd) << " applied=" << (e.applied ? 1 : 0)
       << " out=" << (e.output ? to_string(*e.output) : std::string("none"));
  }
  void operator()(const ResponseEvent& e) const {
    os << "ev=respond replica=" << e.replica << " v=" << to_string(e.v) << " client=" << e.client
       << " seq=" << e.seq << " out=" << to_string(e.output);
  }
};

}  // namespace

std::string to_string(const Event& e) {
  std::ostringstream os;
  os << "t=" << e.time << " ";
  std::visit(Printer{os}, e.body);
  return os.str();
}

std::string History::serialize() const {
  std::string out;
  for (const auto& e : events) {
    out += to_string(e);
    out += '\n';
  }
  return out;
}

}  // namespace bpaxos
