#include "lightchain/node.hpp"

#include "lightchain/simulation.hpp"

#include <stdexcept>

namespace lightchain {

namespace {

constexpr std::size_t kRouteHopBytes = 40;
constexpr std::size_t kFetchBytes = 32;

// Runs a sequence of searches one after another, each as routed messages.
void route_in_order(Simulation& sim, std::shared_ptr<const std::vector<RouteTrace>> searches, std::size_t i,
                    const Identifier& context, std::function<void()> done)
{
    if (i == searches->size()) {
        done();
        return;
    }
    sim.send_route((*searches)[i], true, MessageTag::overlay_route, context, kRouteHopBytes,
                   [&sim, searches, i, context, done = std::move(done)]() mutable {
                       route_in_order(sim, searches, i + 1, context, std::move(done));
                   });
}

Bytes entity_payload(const Entity& entity, const std::optional<BlockBundle>& bundle)
{
    return bundle ? encode_bundle(*bundle) : encode_wire(entity);
}

}  // namespace

struct Node::Proposal {
    Entity entity;
    std::optional<BlockBundle> bundle;
    Identifier id;
    Identifier context;
    std::vector<ValidationTicket> tickets;
    std::vector<bool> replied;
    std::size_t resolved = 0;
    std::size_t replies = 0;
    bool concluded = false;
    ProposalCallback done;
};

Node::Node(Simulation& sim, std::uint32_t index, bool malicious)
    : sim_(sim),
      index_(index),
      address_(Address::for_node(index)),
      key_(NodeKey::for_node(index)),
      identifier_(derive_node_identifier(key_)),
      malicious_(malicious),
      store_(sim.options().seed),
      view_(sim.genesis()),
      recipient_rng_(sim.options().seed, "recipient", index),
      backoff_rng_(sim.options().seed, "backoff", index),
      corrupt_rng_(sim.options().seed, "corrupt", index)
{
}

std::vector<Identifier> Node::pool_order() const
{
    std::vector<Identifier> out;
    out.reserve(pool_.size());
    for (const auto& [at, id] : pool_) out.push_back(id);
    return out;
}

ValidationRules Node::rules() const
{
    const auto& cfg = sim_.config();
    return {cfg.nodes, cfg.signature_threshold, cfg.block_size_min, sim_.drain_mode()};
}

void Node::start_generation(VirtualMs first_due)
{
    if (sim_.config().transactions_per_node == 0) return;
    next_tx_due_ = first_due;
    timer_armed_ = true;
    sim_.queue().schedule(first_due, EventKind::timer, [this] { on_tx_timer(); });
}

void Node::on_tx_timer()
{
    timer_armed_ = false;
    const auto& cfg = sim_.config();
    if (tx_generated_ >= cfg.transactions_per_node) return;

    LogicalTx ltx;
    ltx.seq = tx_generated_++;
    ltx.created_at = sim_.queue().now();
    std::uint64_t r = recipient_rng_.uniform_below(cfg.nodes - 1);
    ltx.recipient = static_cast<std::uint32_t>(r >= index_ ? r + 1 : r);
    ltx.corrupt = malicious_ && corrupt_rng_.bernoulli(sim_.options().corrupt_probability);

    if (tx_generated_ < cfg.transactions_per_node) {
        next_tx_due_ = ltx.created_at + cfg.inter_tx_delay_ms();
        timer_armed_ = true;
        sim_.queue().schedule(next_tx_due_, EventKind::timer, [this] { on_tx_timer(); });
    }
    start_tx_attempt(ltx, 0, std::nullopt);
}

void Node::start_tx_attempt(const LogicalTx& ltx, std::uint32_t attempt, std::optional<Identifier> context)
{
    Transaction tx;
    tx.owner = index_;
    tx.recipient = ltx.recipient;
    tx.amount = 1;
    tx.prev_block_id = view_.tail();
    if (ltx.corrupt && attempt == 0) {
        tx.prev_block_id = Hasher().update("forged-parent").update_u32(index_).update_u64(ltx.seq).finish();
    }
    tx.seq = ltx.seq;
    tx.created_at = ltx.created_at;
    tx.attempt = attempt;
    seal(tx);

    const Identifier ctx = context.value_or(tx.id);
    propose(tx, std::nullopt, ctx, [this, ltx, attempt, ctx](const ProposalOutcome& out) {
        if (out.finalized) {
            ++tx_finalized_;
            if (finalized_created_at_.size() <= ltx.seq) finalized_created_at_.resize(ltx.seq + 1, 0);
            finalized_created_at_[ltx.seq] = ltx.created_at;
            return;
        }
        if (attempt + 1 >= sim_.options().max_attempts) {
            sim_.flag_stall("transaction " + std::to_string(index_) + "/" + std::to_string(ltx.seq) +
                            " rejected " + std::to_string(attempt + 1) + " times");
            return;
        }
        start_tx_attempt(ltx, attempt + 1, ctx);
    });
}

bool Node::eligible() const
{
    if (pool_.empty()) return false;
    return pool_.size() >= sim_.config().block_size_min || sim_.drain_mode();
}

bool Node::maybe_trigger_block()
{
    if (attempt_active_ || !eligible()) return false;
    attempt_active_ = true;
    VirtualMs backoff = backoff_rng_.uniform_below(kBlockBackoffMs);
    sim_.queue().schedule_after(backoff, EventKind::internal,
                                [this] { attempt_block(0, std::nullopt, sim_.queue().now()); });
    return true;
}

void Node::attempt_block(std::uint32_t attempt, std::optional<Identifier> context, VirtualMs first_created)
{
    if (!eligible()) {
        attempt_active_ = false;
        return;
    }

    BlockBundle bundle;
    Block& b = bundle.block;
    b.owner = index_;
    b.prev_block_id = forced_parent_.value_or(view_.tail());
    forced_parent_.reset();
    const ChainView::BlockInfo* parent = view_.block(b.prev_block_id);
    b.height = (parent ? parent->height : view_.tail_height()) + 1;
    for (const auto& [at, id] : pool_) {
        b.tx_ids.push_back(id);
        bundle.transactions.push_back(sim_.interned(*sim_.interned_index(id)));
    }
    b.drain = b.tx_ids.size() < sim_.config().block_size_min;
    if (attempt == 0 && malicious_ && corrupt_rng_.bernoulli(sim_.options().corrupt_probability)) {
        b.prev_block_id = Hasher().update("forged-parent").update_u32(index_).update_u64(first_created).finish();
    }
    b.created_at = first_created;
    b.attempt = attempt;
    seal(b);

    const Identifier ctx = context.value_or(b.id);
    Entity entity = b;
    propose(std::move(entity), std::move(bundle), ctx, [this, attempt, ctx, first_created](const ProposalOutcome& out) {
        if (out.finalized || attempt >= kBlockRetries) {
            attempt_active_ = false;
            maybe_trigger_block();
            return;
        }
        VirtualMs backoff = backoff_rng_.uniform_below(kBlockBackoffMs);
        sim_.queue().schedule_after(backoff, EventKind::internal, [this, attempt, ctx, first_created] {
            attempt_block(attempt + 1, ctx, first_created);
        });
    });
}

void Node::submit(Entity entity, std::optional<BlockBundle> bundle, ProposalCallback done)
{
    Identifier ctx = entity_id(entity);
    propose(std::move(entity), std::move(bundle), ctx, std::move(done));
}

void Node::propose(Entity entity, std::optional<BlockBundle> bundle, const Identifier& context, ProposalCallback done)
{
    auto p = std::make_shared<Proposal>();
    p->id = entity_id(entity);
    p->entity = std::move(entity);
    p->bundle = std::move(bundle);
    p->context = context;
    p->done = std::move(done);
    p->tickets = select_validators(sim_.overlay(), address_, p->id, sim_.config().validators_per_entity);
    p->replied.assign(p->tickets.size(), false);
    active_[p->id] = p;

    if (p->tickets.empty()) {
        dispatch_requests(p);
        return;
    }
    for (std::size_t slot = 0; slot < p->tickets.size(); ++slot) resolve_ticket(p, slot, 0);
}

void Node::resolve_ticket(const std::shared_ptr<Proposal>& p, std::size_t slot, std::size_t search)
{
    const auto& searches = p->tickets[slot].searches;
    if (search == searches.size()) {
        if (++p->resolved == p->tickets.size()) dispatch_requests(p);
        return;
    }
    sim_.send_route(searches[search], true, MessageTag::overlay_route, p->context, kRouteHopBytes,
                    [this, p, slot, search] { resolve_ticket(p, slot, search + 1); });
}

void Node::dispatch_requests(const std::shared_ptr<Proposal>& p)
{
    if (p->tickets.empty()) {
        conclude(p);
        return;
    }
    const Payload request(entity_payload(p->entity, p->bundle));
    for (const auto& t : p->tickets) {
        Envelope env;
        env.src = address_;
        env.dst = t.validator_address;
        env.tag = MessageTag::validate_request;
        env.payload = request;
        env.context = p->context;
        const std::uint32_t validator = t.validator;
        const std::size_t slot = t.slot;
        sim_.network().send(std::move(env), [this, validator, slot](const Envelope& e) {
            sim_.node(validator).on_validate_request(e, index_, slot);
        });
    }
    sim_.queue().schedule_after(sim_.validation_timeout_ms(), EventKind::internal, [this, p] { conclude(p); });
}

void Node::on_validate_request(const Envelope& env, std::uint32_t owner, std::size_t slot)
{
    const Identifier ctx = env.context.value_or(Identifier{});
    const Address reply_to = env.src;
    evaluate(env.payload.bytes(), ctx, [this, owner, slot, reply_to, ctx](Identifier id, Decision honest) {
        const Decision d = apply_behavior(honest, malicious_);
        const Identifier token = signature_token(id, index_, d);
        Envelope reply;
        reply.src = address_;
        reply.dst = reply_to;
        reply.tag = MessageTag::validate_reply;
        Bytes body(id.bytes().begin(), id.bytes().end());
        for (int shift = 24; shift >= 0; shift -= 8) body.push_back(static_cast<std::uint8_t>(index_ >> shift));
        body.push_back(static_cast<std::uint8_t>(d));
        body.insert(body.end(), token.bytes().begin(), token.bytes().end());
        reply.payload = std::move(body);
        reply.context = ctx;
        sim_.network().send(std::move(reply), [this, owner, slot, id, d, token](const Envelope&) {
            sim_.node(owner).on_validate_reply(id, slot, d, token);
        });
    });
}

void Node::evaluate(const Bytes& payload, const Identifier& context, std::function<void(Identifier, Decision)> done)
{
    const std::uint64_t seed = sim_.options().seed;
    if (!payload.empty() && payload[0] == 0x02) {
        auto bundle = std::make_shared<BlockBundle>(decode_bundle(payload, seed));
        ensure_block_known(bundle->block.prev_block_id, context, [this, bundle, done](bool) {
            done(bundle->block.id, validate_block(*bundle, view_, rules()));
        });
        return;
    }
    Entity e = decode_wire(payload, seed);
    auto tx = std::make_shared<Transaction>(std::get<Transaction>(std::move(e)));
    ensure_block_known(tx->prev_block_id, context, [this, tx, done](bool) {
        done(tx->id, validate_transaction(*tx, view_, finalized_seqs_, rules()));
    });
}

void Node::ensure_block_known(const Identifier& block_id, const Identifier& context, std::function<void(bool)> done)
{
    if (view_.knows(block_id)) {
        done(true);
        return;
    }
    if (const Entity* local = store_.fetch(block_id); local && std::holds_alternative<Block>(*local)) {
        const Block& b = std::get<Block>(*local);
        apply(view_.add_block(sim_.intern(b)));
        if (view_.knows(block_id)) {
            done(true);
            return;
        }
        ensure_block_known(b.prev_block_id, context,
                           [this, block_id, done](bool) { done(view_.knows(block_id)); });
        return;
    }

    SearchResult found;
    try {
        found = sim_.overlay().resolve_holders(address_, block_id);
    } catch (const OverlayError& e) {
        if (e.kind() != OverlayError::Kind::NotFound) throw;
        // The failed lookup still costs its route.
        SearchResult miss = sim_.overlay().search_num_id(address_, block_id, VertexKind::data_object);
        sim_.send_route(miss.trace, true, MessageTag::overlay_route, context, kRouteHopBytes,
                        [done] { done(false); });
        return;
    }
    Address holder = found.holders.empty() ? found.terminal : found.holders.front();
    for (const auto& h : found.holders) {
        if (h.node_index != index_) {
            holder = h;
            break;
        }
    }
    sim_.send_route(found.trace, true, MessageTag::overlay_route, context, kRouteHopBytes,
                    [this, holder, block_id, context, done] { fetch_from(holder, block_id, context, done); });
}

void Node::fetch_from(const Address& holder, const Identifier& block_id, const Identifier& context,
                      std::function<void(bool)> done)
{
    auto received = [this, block_id, context, done](const Block& b) {
        apply(view_.add_block(sim_.intern(b)));
        if (view_.knows(block_id)) {
            done(true);
            return;
        }
        ensure_block_known(b.prev_block_id, context, [this, block_id, done](bool) { done(view_.knows(block_id)); });
    };

    Envelope req;
    req.src = address_;
    req.dst = holder;
    req.tag = MessageTag::fetch;
    Bytes body(block_id.bytes().begin(), block_id.bytes().end());
    body.resize(kFetchBytes);
    req.payload = std::move(body);
    req.context = context;
    const std::uint32_t holder_index = holder.node_index;
    sim_.network().send(std::move(req), [this, holder_index, block_id, context, received, done](const Envelope& e) {
        Node& h = sim_.node(holder_index);
        const Entity* stored = h.store().fetch(block_id);
        if (!stored || !std::holds_alternative<Block>(*stored)) {
            done(false);
            return;
        }
        Envelope resp;
        resp.src = h.address();
        resp.dst = e.src;
        resp.tag = MessageTag::fetch;
        resp.payload = encode_wire(*stored);
        resp.context = context;
        sim_.network().send(std::move(resp), [this, received](const Envelope& r) {
            received(std::get<Block>(decode_wire(r.payload.bytes(), sim_.options().seed)));
        });
    });
}

void Node::on_validate_reply(const Identifier& entity_id, std::size_t slot, Decision decision, const Identifier& token)
{
    auto it = active_.find(entity_id);
    if (it == active_.end()) return;
    auto p = it->second;
    if (p->replied[slot]) return;
    p->replied[slot] = true;
    p->tickets[slot].decision = decision;
    p->tickets[slot].token = token;
    if (++p->replies == p->tickets.size()) conclude(p);
}

void Node::conclude(const std::shared_ptr<Proposal>& p)
{
    if (p->concluded) return;
    p->concluded = true;
    active_.erase(p->id);

    const bool is_block = std::holds_alternative<Block>(p->entity);
    FinalizeOutcome fin = finalize(is_block, index_, p->tickets, sim_.economy(), sim_.config());

    ProposalOutcome out;
    out.entity_id = p->id;
    out.finalized = fin.finalized;
    out.approvals = fin.approvals;
    out.tickets = p->tickets;

    if (fin.finalized) {
        std::vector<Signature> sigs;
        for (const auto& t : p->tickets) {
            if (t.decision != Decision::silent) sigs.push_back({t.validator, t.decision, t.token});
        }
        std::visit([&](auto& e) { e.signatures = sigs; }, p->entity);
        if (p->bundle) p->bundle->block.signatures = sigs;

        sim_.on_finalized(p->entity, p->context, p->tickets.size(), fin.approvals);
        store_and_announce(p->entity, p->context);
        replicate(p->entity, p->bundle, p->context);
        disseminate(p->entity, p->bundle, p->tickets, p->context);
    }
    if (p->done) p->done(out);
}

void Node::store_and_announce(const Entity& entity, const Identifier& context)
{
    if (!store_.store(entity)) return;
    sim_.on_stored(entity_id(entity), index_);
    Announcement a;
    try {
        a = sim_.overlay().announce(entity_id(entity), address_, VertexKind::data_object);
    } catch (const OverlayError& e) {
        if (e.kind() != OverlayError::Kind::DuplicateAnnouncement) throw;
        return;
    }
    sim_.send_route(a.trace, false, MessageTag::announce, context, kRouteHopBytes, [] {});
}

void Node::replicate(const Entity& entity, const std::optional<BlockBundle>& bundle, const Identifier& context)
{
    const Identifier id = entity_id(entity);
    auto holders = select_replica_holders(sim_.overlay(), address_, id, sim_.replication_factor());
    if (holders.empty()) return;
    const Payload payload(entity_payload(entity, bundle));
    for (auto& t : holders) {
        auto searches = std::make_shared<const std::vector<RouteTrace>>(std::move(t.searches));
        const Address dst = t.validator_address;
        route_in_order(sim_, searches, 0, context, [this, dst, payload, context] {
            Envelope env;
            env.src = address_;
            env.dst = dst;
            env.tag = MessageTag::replicate;
            env.payload = payload;
            env.context = context;
            sim_.network().send(std::move(env), [this, dst, context](const Envelope& e) {
                Node& holder = sim_.node(dst.node_index);
                const std::uint64_t seed = sim_.options().seed;
                if (e.payload.bytes().at(0) == 0x02) {
                    BlockBundle b = decode_bundle(e.payload.bytes(), seed);
                    holder.store_and_announce(b.block, context);
                    holder.learn_block(b);
                } else {
                    Transaction tx = std::get<Transaction>(decode_wire(e.payload.bytes(), seed));
                    holder.store_and_announce(tx, context);
                    holder.learn_transaction(tx);
                }
            });
        });
    }
}

void Node::disseminate(const Entity& entity, const std::optional<BlockBundle>& bundle,
                       const std::vector<ValidationTicket>& tickets, const Identifier& context)
{
    if (bundle) {
        learn_block(*bundle);
        const Payload payload(encode_bundle(*bundle));
        for (std::uint32_t j = 0; j < sim_.node_count(); ++j) {
            if (j == index_) continue;
            Envelope env;
            env.src = address_;
            env.dst = sim_.node(j).address();
            env.tag = MessageTag::notify;
            env.payload = payload;
            env.context = context;
            sim_.network().send(std::move(env), [this, j](const Envelope& e) {
                sim_.node(j).learn_block(decode_bundle(e.payload.bytes(), sim_.options().seed));
            });
        }
        return;
    }
    const Transaction& tx = std::get<Transaction>(entity);
    learn_transaction(tx);
    const Payload payload(encode_wire(tx));
    for (const auto& t : tickets) {
        Envelope env;
        env.src = address_;
        env.dst = t.validator_address;
        env.tag = MessageTag::notify;
        env.payload = payload;
        env.context = context;
        const std::uint32_t v = t.validator;
        sim_.network().send(std::move(env), [this, v](const Envelope& e) {
            sim_.node(v).learn_transaction(std::get<Transaction>(decode_wire(e.payload.bytes(), sim_.options().seed)));
        });
    }
}

void Node::remember(const Transaction& tx)
{
    const std::uint32_t index = sim_.intern(tx);
    if (learned_at(index)) return;
    if (learned_at_.size() <= index) learned_at_.resize(std::size_t{index} + 1, kNotLearned);
    learned_at_[index] = sim_.queue().now();
    finalized_seqs_.insert({tx.owner, tx.seq});
    if (!view_.in_chain(tx.id)) pool_.insert({learned_at_[index], tx.id});
}

std::optional<VirtualMs> Node::learned_at(const Identifier& tx_id) const
{
    const auto index = sim_.interned_index(tx_id);
    if (!index) return std::nullopt;
    return learned_at(*index);
}

std::optional<VirtualMs> Node::learned_at(std::uint32_t index) const
{
    if (index >= learned_at_.size() || learned_at_[index] == kNotLearned) return std::nullopt;
    return learned_at_[index];
}

void Node::apply(const ChainView::ChainUpdate& update)
{
    for (const auto& id : update.removed) {
        if (auto at = learned_at(id)) pool_.insert({*at, id});
    }
    for (const auto& id : update.added) {
        if (auto at = learned_at(id)) pool_.erase({*at, id});
    }
}

void Node::learn_transaction(const Transaction& tx)
{
    remember(tx);
    maybe_trigger_block();
}

void Node::learn_block(const BlockBundle& bundle)
{
    for (const auto& tx : bundle.transactions) remember(tx);
    apply(view_.add_block(sim_.intern(bundle.block)));
    maybe_trigger_block();
}

void Node::check_invariants() const
{
    const auto& cfg = sim_.config();
    if (tx_generated_ > cfg.transactions_per_node) throw std::logic_error("node generated too many transactions");
    if (tx_finalized_ > tx_generated_) throw std::logic_error("node finalized more transactions than it generated");
    for (const auto& [at, id] : pool_) {
        if (!learned_at(id)) throw std::logic_error("pool holds an unknown transaction");
        if (view_.in_chain(id)) throw std::logic_error("pool holds a transaction already in the chain");
    }
    store_.check_invariants();
    view_.check_integrity();
}

}  // namespace lightchain
