#include <benchmark/benchmark.h>

#include <random>

#include "rucs/broker.hpp"
#include "rucs/geo_index.hpp"
#include "rucs/property_engine.hpp"
#include "rucs/state_log.hpp"

using namespace rucs;

namespace {

// n trips scattered over a few kilometres, all fresh.
void fill(GeoIndex& geo, ManualClock& clock, int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> jitter(-0.02, 0.02);
  for (int i = 0; i < n; ++i) {
    const TripId trip{"t" + std::to_string(i)};
    geo.activate(trip, {});
    (void)geo.upsert_position(trip, LocationState{48.18 + jitter(rng), 14.12 + jitter(rng), 13.9, 90.0},
                              clock.now(), 1);
  }
}

}  // namespace

static void BM_Neighbors(benchmark::State& state) {
  ManualClock clock;
  GeoIndex geo(clock);
  fill(geo, clock, static_cast<int>(state.range(0)));
  const TripId me{"t0"};
  for (auto _ : state) {
    auto list = geo.neighbors(me, 500.0, 5.0);
    benchmark::DoNotOptimize(list);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Neighbors)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

static void BM_UpsertPosition(benchmark::State& state) {
  ManualClock clock;
  GeoIndex geo(clock);
  fill(geo, clock, 1000);
  const TripId me{"t0"};
  std::int64_t seq = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(geo.upsert_position(me, LocationState{48.18, 14.12, 13.9, 90.0}, clock.now(), ++seq));
  }
}
BENCHMARK(BM_UpsertPosition);

static void BM_BrokerPublish(benchmark::State& state) {
  Broker broker(1024);
  const TopicName topic = "trip.b.in";
  (void)broker.declare_topic(topic);
  std::vector<Subscription> subs;
  for (int i = 0; i < state.range(0); ++i) {
    auto s = broker.subscribe(topic);
    subs.push_back(std::move(*s));
  }
  Envelope e;
  e.topic = topic;
  e.correlation_id = "c-1";
  e.action = "yield_request";
  e.payload = {{"side", "left"}};
  std::size_t n = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(broker.publish(e));
    // keep queues from overflowing so every publish does the same work
    if (++n % 512 == 0) {
      for (auto& s : subs) s.drain();
    }
  }
}
BENCHMARK(BM_BrokerPublish)->Arg(1)->Arg(4);

static void BM_HandleProperty(benchmark::State& state) {
  ManualClock clock;
  StateLog log;
  const TripId target{"B"};
  log.open_trip(target);
  for (int i = 1; i <= state.range(0); ++i) {
    StateRecord r;
    r.trip = target;
    r.seq = i;
    r.recorded_at = clock.now();
    r.location = LocationState{48.18, 14.12, 13.9, 90.0};
    // driver state only in the first record: the worst case for the lookup
    if (i == 1) r.driver = DriverState{Drowsiness::low, clock.now()};
    (void)log.append_state(r);
  }
  const auto catalog = Catalog::with_defaults();
  PropertyEngine engine(catalog, log, clock, HandlerChain::with_defaults(), 0);
  const PropertyRequest request{TripId{"A"}, target, "drowsiness", {}};
  const std::set<PropertyName> exposed{"drowsiness"};
  for (auto _ : state) {
    auto r = engine.handle_property(request, exposed);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_HandleProperty)->Arg(1)->Arg(1000)->Arg(20000);

BENCHMARK_MAIN();
