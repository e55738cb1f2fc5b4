#include "bpaxos/socket_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <map>
#include <mutex>
#include <queue>
#include <random>
#include <thread>

#include "bpaxos/client.hpp"
#include "bpaxos/wire.hpp"

namespace bpaxos {

namespace {

using Clock = std::chrono::steady_clock;

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

bool write_all(int fd, const std::uint8_t* data, std::size_t len) {
  while (len > 0) {
    const ssize_t n = ::send(fd, data, len, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data += n;
    len -= static_cast<std::size_t>(n);
  }
  return true;
}

struct Inbound {
  Address from;
  Message msg;
};

struct Timer {
  Clock::time_point deadline;
  std::uint64_t seq;
  std::uint64_t token;
  bool operator>(const Timer& o) const {
    return deadline != o.deadline ? deadline > o.deadline : seq > o.seq;
  }
};

// Reassembles length-prefixed frames from one accepted connection.
struct Reader {
  int fd = -1;
  std::vector<std::uint8_t> buf;
};

}  // namespace

struct SocketCluster::Impl {
  struct Node;

  class NodeContext : public Context {
   public:
    NodeContext(Impl& impl, Node& node) : impl_(impl), node_(node) {}
    Time now() const override { return impl_.now(); }
    Address self() const override { return node_.addr; }
    void send(const Address& to, Message msg) override { impl_.send(node_, to, std::move(msg)); }
    void set_timer(Time delay, std::uint64_t token) override {
      node_.timers.push(Timer{Clock::now() + std::chrono::microseconds(std::max<Time>(delay, 0)),
                              node_.timer_seq++, token});
    }
    std::uint64_t random(std::uint64_t bound) override {
      if (bound == 0) return 0;
      return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(node_.rng);
    }
    void record(EventBody event) override {
      std::lock_guard lock(impl_.history_mu);
      impl_.history.add(impl_.now(), std::move(event));
    }

   private:
    Impl& impl_;
    Node& node_;
  };

  struct Node {
    Address addr;
    std::unique_ptr<Role> role;
    ClosedLoopClient* client = nullptr;
    bool counted_done = false;

    int listen_fd = -1;
    std::uint16_t port = 0;
    std::thread io;
    std::thread worker;

    std::mutex mu;
    std::condition_variable cv;
    std::deque<Inbound> inbox;

    // Worker-thread state.
    std::priority_queue<Timer, std::vector<Timer>, std::greater<>> timers;
    std::uint64_t timer_seq = 0;
    std::map<Address, int> out;
    std::mt19937_64 rng;
    std::uint64_t sent = 0;
    std::uint64_t received = 0;
  };

  ClusterConfig config;
  WorkloadSpec workload;
  std::uint64_t seed;
  std::vector<std::unique_ptr<Node>> nodes;
  std::map<Address, Node*> by_addr;
  Clock::time_point epoch;
  std::atomic<bool> stopping{false};
  std::atomic<std::uint32_t> clients_done{0};
  std::mutex done_mu;
  std::condition_variable done_cv;
  std::mutex history_mu;
  History history;
  bool started = false;
  bool joined = false;

  Time now() const {
    return std::chrono::duration_cast<std::chrono::microseconds>(Clock::now() - epoch).count();
  }

  void deliver(Node& to, Address from, Message msg) {
    {
      std::lock_guard lock(to.mu);
      to.inbox.push_back(Inbound{from, std::move(msg)});
    }
    to.cv.notify_one();
  }

  void send(Node& from, const Address& to, Message msg) {
    ++from.sent;
    auto target = by_addr.find(to);
    if (target == by_addr.end()) return;
    if (to == from.addr) {
      deliver(from, from.addr, std::move(msg));
      return;
    }
    int& fd = from.out[to];
    if (fd <= 0) {
      fd = ::socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) return;
      const int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      sockaddr_in sa{};
      sa.sin_family = AF_INET;
      sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
      sa.sin_port = htons(target->second->port);
      if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0) {
        ::close(fd);
        fd = 0;
        return;
      }
    }
    const auto frame = wire::encode_frame(from.addr, msg);
    if (!write_all(fd, frame.data(), frame.size())) {
      ::close(fd);
      fd = 0;
    }
  }

  void io_loop(Node& node) {
    std::vector<Reader> readers;
    std::vector<pollfd> fds;
    std::uint8_t chunk[64 * 1024];
    while (!stopping.load()) {
      fds.clear();
      fds.push_back(pollfd{node.listen_fd, POLLIN, 0});
      for (const auto& r : readers) fds.push_back(pollfd{r.fd, POLLIN, 0});
      const int ready = ::poll(fds.data(), fds.size(), 20);
      if (ready <= 0) continue;
      if (fds[0].revents & POLLIN) {
        const int fd = ::accept(node.listen_fd, nullptr, nullptr);
        if (fd >= 0) readers.push_back(Reader{fd, {}});
      }
      for (std::size_t i = 1; i < fds.size(); ++i) {
        if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
        Reader& r = readers[i - 1];
        const ssize_t n = ::recv(r.fd, chunk, sizeof chunk, 0);
        if (n <= 0) {
          ::close(r.fd);
          r.fd = -1;
          continue;
        }
        r.buf.insert(r.buf.end(), chunk, chunk + n);
        std::size_t at = 0;
        while (r.buf.size() - at >= 4) {
          const std::uint32_t len = (std::uint32_t{r.buf[at]} << 24) | (std::uint32_t{r.buf[at + 1]} << 16) |
                                    (std::uint32_t{r.buf[at + 2]} << 8) | std::uint32_t{r.buf[at + 3]};
          if (len > wire::kMaxFrameSize) {
            ::close(r.fd);
            r.fd = -1;
            break;
          }
          if (r.buf.size() - at - 4 < len) break;
          try {
            auto frame = wire::decode_frame_body({r.buf.data() + at + 4, len});
            deliver(node, frame.from, std::move(frame.msg));
          } catch (const wire::DecodeError&) {
            // A malformed frame from a peer is dropped like a lost message.
          }
          at += 4 + len;
        }
        if (r.fd >= 0) r.buf.erase(r.buf.begin(), r.buf.begin() + static_cast<std::ptrdiff_t>(at));
      }
      std::erase_if(readers, [](const Reader& r) { return r.fd < 0; });
    }
    for (auto& r : readers) ::close(r.fd);
  }

  void note_client_progress(Node& node) {
    if (node.client == nullptr || node.counted_done || !node.client->done()) return;
    node.counted_done = true;
    if (clients_done.fetch_add(1) + 1 == workload.clients) {
      std::lock_guard lock(done_mu);
      done_cv.notify_all();
    }
  }

  void worker_loop(Node& node) {
    NodeContext ctx(*this, node);
    node.role->start(ctx);
    note_client_progress(node);
    std::deque<Inbound> batch;
    while (!stopping.load()) {
      {
        std::unique_lock lock(node.mu);
        auto wake = Clock::now() + std::chrono::milliseconds(20);
        if (!node.timers.empty()) wake = std::min(wake, node.timers.top().deadline);
        node.cv.wait_until(lock, wake, [&] { return !node.inbox.empty() || stopping.load(); });
        batch.swap(node.inbox);
      }
      for (auto& in : batch) {
        ++node.received;
        node.role->on_message(in.from, in.msg, ctx);
        note_client_progress(node);
      }
      batch.clear();
      while (!node.timers.empty() && node.timers.top().deadline <= Clock::now()) {
        const std::uint64_t token = node.timers.top().token;
        node.timers.pop();
        node.role->on_timer(token, ctx);
        note_client_progress(node);
      }
    }
  }

  void add(Address addr, std::unique_ptr<Role> role, ClosedLoopClient* client) {
    auto node = std::make_unique<Node>();
    node->addr = addr;
    node->role = std::move(role);
    node->client = client;
    std::seed_seq s{seed, (static_cast<std::uint64_t>(addr.kind) << 32) | addr.index};
    node->rng.seed(s);
    by_addr[addr] = node.get();
    nodes.push_back(std::move(node));
  }

  void shutdown() {
    if (joined) return;
    stopping.store(true);
    for (auto& n : nodes) n->cv.notify_all();
    for (auto& n : nodes) {
      if (n->worker.joinable()) n->worker.join();
      if (n->io.joinable()) n->io.join();
    }
    for (auto& n : nodes) {
      for (auto& [_, fd] : n->out) {
        if (fd > 0) ::close(fd);
      }
      if (n->listen_fd >= 0) ::close(n->listen_fd);
      n->listen_fd = -1;
    }
    joined = true;
  }
};

SocketCluster::SocketCluster(ClusterConfig config, WorkloadSpec workload, std::uint64_t seed)
    : impl_(std::make_unique<Impl>()) {
  config.validate();
  impl_->config = config;
  impl_->workload = workload;
  impl_->seed = seed;
  for (auto& [addr, role] : build_cluster(config)) impl_->add(addr, std::move(role), nullptr);
  CommandGenerator generator(workload.conflict_rate, seed);
  for (std::uint32_t c = 0; c < workload.clients; ++c) {
    auto client = std::make_unique<ClosedLoopClient>(c, config, generator, workload.commands_per_client);
    ClosedLoopClient* raw = client.get();
    impl_->add(Address{RoleKind::Client, c}, std::move(client), raw);
  }
}

SocketCluster::~SocketCluster() {
  if (impl_) impl_->shutdown();
}

void SocketCluster::start() {
  if (impl_->started) return;
  for (auto& n : impl_->nodes) {
    n->listen_fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (n->listen_fd < 0) throw TransportError(errno_text("socket"));
    const int one = 1;
    ::setsockopt(n->listen_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    sa.sin_port = 0;
    if (::bind(n->listen_fd, reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0) {
      throw TransportError(errno_text("bind"));
    }
    if (::listen(n->listen_fd, 128) < 0) throw TransportError(errno_text("listen"));
    socklen_t len = sizeof sa;
    if (::getsockname(n->listen_fd, reinterpret_cast<sockaddr*>(&sa), &len) < 0) {
      throw TransportError(errno_text("getsockname"));
    }
    n->port = ntohs(sa.sin_port);
  }
  impl_->started = true;
}

SocketRunResult SocketCluster::run(std::chrono::milliseconds limit) {
  start();
  Impl& impl = *impl_;
  impl.epoch = Clock::now();
  for (auto& n : impl.nodes) n->io = std::thread([&impl, node = n.get()] { impl.io_loop(*node); });
  for (auto& n : impl.nodes) n->worker = std::thread([&impl, node = n.get()] { impl.worker_loop(*node); });
  {
    std::unique_lock lock(impl.done_mu);
    impl.done_cv.wait_for(lock, limit, [&] {
      return impl.workload.commands_per_client != 0 && impl.clients_done.load() == impl.workload.clients;
    });
  }
  SocketRunResult result;
  result.seconds = std::chrono::duration<double>(Clock::now() - impl.epoch).count();
  impl.shutdown();
  result.all_done = impl.clients_done.load() == impl.workload.clients;
  for (auto& n : impl.nodes) {
    result.counts.sent[n->addr] = n->sent;
    result.counts.received[n->addr] = n->received;
    if (n->client != nullptr) {
      result.completed += n->client->completed();
      result.latencies.insert(result.latencies.end(), n->client->latencies().begin(),
                              n->client->latencies().end());
    }
  }
  result.history = std::move(impl.history);
  return result;
}

}  // namespace bpaxos
