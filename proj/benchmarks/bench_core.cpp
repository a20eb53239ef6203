#include <benchmark/benchmark.h>

#include <random>

#include "mcquic/crypto.hpp"
#include "mcquic/fec.hpp"
#include "mcquic/gf256.hpp"
#include "mcquic/varint.hpp"
#include "mcquic/wire.hpp"

using namespace mcquic;

namespace {

Bytes rand_bytes(std::mt19937_64& rng, size_t n) {
  Bytes out(n);
  for (auto& b : out) b = uint8_t(rng());
  return out;
}

void BM_VarintEncode(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<uint64_t> values(1024);
  for (auto& v : values) v = rng() % (kVarintMax + 1);
  size_t i = 0;
  for (auto _ : state) {
    auto enc = encode_varint(values[i++ & 1023]);
    benchmark::DoNotOptimize(enc);
  }
}
BENCHMARK(BM_VarintEncode);

void BM_FrameRoundTrip(benchmark::State& state) {
  StreamFrame f;
  f.stream_id = 91;
  f.offset = 4096;
  f.data = Bytes(size_t(state.range(0)), 0x5C);
  Frame frame{f};
  for (auto _ : state) {
    Bytes enc = encode_frame(frame);
    auto dec = decode_frame(as_span(enc));
    benchmark::DoNotOptimize(dec);
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(BM_FrameRoundTrip)->Arg(256)->Arg(1300);

void BM_Gf256MulAdd(benchmark::State& state) {
  std::mt19937_64 rng(2);
  Bytes in = rand_bytes(rng, size_t(state.range(0)));
  Bytes out(in.size(), 0);
  for (auto _ : state) {
    gf256::mul_add(out.data(), in.data(), in.size(), 0x8E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * state.range(0));
}
BENCHMARK(BM_Gf256MulAdd)->Arg(1350);

void BM_GenerateRepair(benchmark::State& state) {
  std::mt19937_64 rng(3);
  size_t k = size_t(state.range(0));
  FecWindow window(k);
  for (size_t i = 0; i < k; ++i) {
    Bytes payload = rand_bytes(rng, 1300);
    window.map_frame(as_span(payload));
  }
  uint64_t index = 0;
  for (auto _ : state) {
    auto rs = generate_repair(window, index);
    index = (index + 1) % 10;
    benchmark::DoNotOptimize(rs);
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * int64_t(k) * 1300);
}
BENCHMARK(BM_GenerateRepair)->Arg(25)->Arg(100)->Arg(240);

void BM_Recover(benchmark::State& state) {
  std::mt19937_64 rng(4);
  size_t k = 100;
  size_t erased = size_t(state.range(0));
  FecWindow window(k);
  std::vector<Bytes> originals;
  for (size_t i = 0; i < k; ++i) {
    originals.push_back(rand_bytes(rng, 1300));
    window.map_frame(as_span(originals.back()));
  }
  std::vector<RepairSymbol> repairs;
  for (size_t r = 0; r < erased; ++r) repairs.push_back(*generate_repair(window, r));
  std::map<uint64_t, Bytes> received;
  for (size_t i = erased; i < k; ++i) received[i] = originals[i];
  for (auto _ : state) {
    auto solved = recover(received, repairs);
    benchmark::DoNotOptimize(solved);
  }
}
BENCHMARK(BM_Recover)->Arg(1)->Arg(5)->Arg(10);

void BM_SealPacket(benchmark::State& state) {
  std::mt19937_64 rng(5);
  auto keys = derive_group_keys(as_span(rand_bytes(rng, 32)));
  Bytes header = rand_bytes(rng, 14);
  Bytes plain = rand_bytes(rng, 1300);
  uint64_t pn = 0;
  for (auto _ : state) {
    Bytes sealed =
        seal_packet(keys, as_span(header), as_span(plain), pn++, PathKind::McData);
    benchmark::DoNotOptimize(sealed);
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * 1300);
}
BENCHMARK(BM_SealPacket);

void BM_ComputeSymTag(benchmark::State& state) {
  std::mt19937_64 rng(6);
  auto uc = derive_unicast_keys(as_span(rand_bytes(rng, 32)), true);
  Bytes packet = rand_bytes(rng, 1350);
  uint64_t pn = 0;
  for (auto _ : state) {
    auto tag = compute_sym_tag(uc, as_span(packet), pn++);
    benchmark::DoNotOptimize(tag);
  }
  state.SetBytesProcessed(int64_t(state.iterations()) * 1350);
}
BENCHMARK(BM_ComputeSymTag);

void BM_SignDatagram(benchmark::State& state) {
  std::mt19937_64 rng(7);
  auto sk = SigningKeys::from_seed(as_span(rand_bytes(rng, 32)));
  Bytes payload = rand_bytes(rng, 1286);
  for (auto _ : state) {
    auto sig = sign_datagram(sk, as_span(payload));
    benchmark::DoNotOptimize(sig);
  }
}
BENCHMARK(BM_SignDatagram);

void BM_VerifyDatagram(benchmark::State& state) {
  std::mt19937_64 rng(8);
  auto sk = SigningKeys::from_seed(as_span(rand_bytes(rng, 32)));
  Bytes payload = rand_bytes(rng, 1286);
  auto sig = sign_datagram(sk, as_span(payload));
  for (auto _ : state) {
    bool ok = verify_datagram(ByteSpan{sk.public_key.data(), 32},
                              as_span(payload), ByteSpan{sig.data(), 64});
    benchmark::DoNotOptimize(ok);
  }
}
BENCHMARK(BM_VerifyDatagram);

}  // namespace

BENCHMARK_MAIN();
