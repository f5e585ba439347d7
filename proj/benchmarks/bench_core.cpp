#include <benchmark/benchmark.h>

#include "ledgerlab/canonical.hpp"
#include "ledgerlab/identity.hpp"
#include "ledgerlab/ledger.hpp"
#include "ledgerlab/rng.hpp"

namespace {

using namespace ledgerlab;

Bytes make_message(size_t n) {
    Rng rng(99);
    return rng.bytes(n);
}

void BM_Sha256(benchmark::State& state) {
    const Bytes msg = make_message(static_cast<size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sha256(msg));
    state.SetBytesProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sha256)->Arg(64)->Arg(1024)->Arg(65536);

void BM_CanonicalEncode(benchmark::State& state) {
    Json j = Json::object();
    Rng rng(7);
    for (int i = 0; i < 32; ++i) j["key_" + std::to_string(i)] = to_hex(rng.bytes(32));
    for (auto _ : state) benchmark::DoNotOptimize(canonical_bytes(j));
}
BENCHMARK(BM_CanonicalEncode);

void BM_Sign(benchmark::State& state) {
    const KeyPair kp = keypair_from_seed(sha256("bench-sign"));
    const Bytes msg = make_message(1024);
    for (auto _ : state) benchmark::DoNotOptimize(sign(kp.private_key, msg));
}
BENCHMARK(BM_Sign);

void BM_Verify(benchmark::State& state) {
    const KeyPair kp = keypair_from_seed(sha256("bench-verify"));
    const Bytes msg = make_message(1024);
    const Bytes sig = sign(kp.private_key, msg);
    for (auto _ : state) benchmark::DoNotOptimize(verify_signature(kp.public_key, msg, sig));
}
BENCHMARK(BM_Verify);

void BM_BlockDataHash(benchmark::State& state) {
    const KeyPair kp = keypair_from_seed(sha256("bench-block"));
    std::vector<TransactionEnvelope> envelopes;
    Rng rng(5);
    for (int i = 0; i < 10; ++i) {
        TransactionEnvelope env;
        env.header.creator = "collab";
        env.header.channel = "bench";
        env.header.nonce = rng.bytes(16);
        env.header.tx_id = compute_tx_id(env.header.creator, env.header.nonce);
        env.payload = rng.bytes(512);
        env.creator_signature = sign(kp.private_key, env.signing_payload());
        envelopes.push_back(std::move(env));
    }
    for (auto _ : state) benchmark::DoNotOptimize(compute_data_hash(envelopes));
}
BENCHMARK(BM_BlockDataHash);

}  // namespace

BENCHMARK_MAIN();
