// Copyright 2026 The fedsql Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>
#include <thread>

#include "fedsql/error.hpp"
#include "fedsql/remote_client.hpp"
#include "fedsql/rls.hpp"

using namespace fedsql;

TEST(ReplicaRegistry, PublishAcknowledgesDistinctTables) {
    ReplicaRegistry r;
    EXPECT_EQ(r.publish("http://s1:80", {"events", "runs"}), 2u);
    EXPECT_EQ(r.publish("http://s1:80", {"events"}), 1u);
    EXPECT_EQ(r.publish("http://s1:80", {"events", "events"}), 1u);
    EXPECT_EQ(r.lookup("events"), std::vector<std::string>{"http://s1:80"});
}

TEST(ReplicaRegistry, RepublishIsIdempotentButRefreshesTimestamp) {
    ReplicaRegistry r;
    r.publish("http://s1:80", {"events"});
    const auto first = r.snapshot().at("events").at(0).published_at;
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    r.publish("http://s1:80", {"events"});
    const auto snap = r.snapshot();
    ASSERT_EQ(snap.at("events").size(), 1u);
    EXPECT_GT(snap.at("events").at(0).published_at, first);
}

TEST(ReplicaRegistry, LookupIsSortedRegardlessOfPublishOrder) {
    std::vector<std::string> servers{"http://c:1", "http://a:2", "http://b:3", "http://a:10"};
    std::vector<std::string> sorted = servers;
    std::sort(sorted.begin(), sorted.end());
    std::mt19937 rng(8);
    for (int i = 0; i < 20; ++i) {
        std::shuffle(servers.begin(), servers.end(), rng);
        ReplicaRegistry r;
        for (const auto& s : servers) r.publish(s, {"t"});
        EXPECT_EQ(r.lookup("t"), sorted);
    }
}

TEST(ReplicaRegistry, UnpublishAndUnknownTables) {
    ReplicaRegistry r;
    EXPECT_TRUE(r.lookup("nothing").empty());
    r.publish("http://s1:80", {"events", "runs"});
    r.publish("http://s2:80", {"events"});
    EXPECT_EQ(r.unpublish("http://s1:80", {"events", "calib"}), 1u);
    EXPECT_EQ(r.lookup("events"), std::vector<std::string>{"http://s2:80"});
    EXPECT_EQ(r.unpublish("http://s2:80", {"events"}), 1u);
    EXPECT_TRUE(r.lookup("events").empty());
    EXPECT_EQ(r.lookup("runs"), std::vector<std::string>{"http://s1:80"});
}

TEST(ReplicaRegistry, MalformedUrlsAreRejected) {
    ReplicaRegistry r;
    for (const char* bad : {"", "s1", "ftp://s1", "http://", "http://has space", "mem:x"}) {
        try {
            r.publish(bad, {"t"});
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::MalformedUrl) << bad;
        }
    }
    EXPECT_TRUE(r.snapshot().empty());
}

TEST(ReplicaRegistry, ConcurrentPublishersSeeConsistentLookups) {
    ReplicaRegistry r;
    std::vector<std::thread> threads;
    for (int w = 0; w < 4; ++w) {
        threads.emplace_back([&, w] {
            for (int i = 0; i < 200; ++i) r.publish("http://s" + std::to_string(w) + ":1", {"a", "b"});
        });
    }
    std::atomic<bool> torn{false};
    threads.emplace_back([&] {
        for (int i = 0; i < 500; ++i) {
            // a and b are always published together
            const auto snap = r.snapshot();
            const std::size_t na = snap.count("a") ? snap.at("a").size() : 0;
            const std::size_t nb = snap.count("b") ? snap.at("b").size() : 0;
            if (na != nb) torn = true;
        }
    });
    for (auto& t : threads) t.join();
    EXPECT_FALSE(torn);
    EXPECT_EQ(r.lookup("a").size(), 4u);
}

TEST(RlsServer, PublishLookupOverTheWire) {
    RlsServer server;
    server.start("127.0.0.1", 0);
    const Endpoint ep{server.base_url()};
    EXPECT_EQ(rls_publish(ep, "http://127.0.0.1:8080", {"events", "runs"}), 2u);
    EXPECT_EQ(rls_lookup(ep, "events"), std::vector<std::string>{"http://127.0.0.1:8080"});
    EXPECT_TRUE(rls_lookup(ep, "calib").empty());
    EXPECT_EQ(rls_unpublish(ep, "http://127.0.0.1:8080", {"runs"}), 1u);
    EXPECT_TRUE(rls_lookup(ep, "runs").empty());
    try {
        rls_publish(ep, "not a url", {"x"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RemoteError);
        EXPECT_EQ(e.remote_code(), "MalformedUrl");
    }
    server.stop();
}

TEST(RlsServer, SecondBindOnSamePortIsAddressInUse) {
    RlsServer a;
    const int port = a.start("127.0.0.1", 0);
    RlsServer b;
    try {
        b.start("127.0.0.1", port);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AddressInUse);
    }
}
