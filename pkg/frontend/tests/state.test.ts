import { describe, expect, it } from "vitest";

import { Store } from "../src/state.js";
import { pageScore, reviewItem, scoreResult } from "./helpers.js";

describe("Store", () => {
  it("applies page scores last-write-wins", () => {
    const store = new Store();
    const older = store.beginPageScore();
    const newer = store.beginPageScore();
    expect(store.applyPageScore(pageScore({ total: 5 }), newer)).toBe(true);
    // The slow, stale response lands afterwards and must not win.
    expect(store.applyPageScore(pageScore({ total: 1 }), older)).toBe(false);
    expect(store.state.pageScore?.total).toBe(5);
  });

  it("keeps stale data when the banner goes up", () => {
    const store = new Store();
    store.applyPageScore(pageScore(), store.beginPageScore());
    store.setBanner("unexpected API payload: boom");
    expect(store.state.banner).toContain("unexpected API payload");
    expect(store.state.pageScore?.total).toBe(10);
  });

  it("clears the banner once a fresh score lands", () => {
    const store = new Store();
    store.setBanner("unexpected API payload: boom");
    store.applyPageScore(pageScore(), store.beginPageScore());
    expect(store.state.banner).toBeNull();
  });

  it("tracks the active language across notices and posts", () => {
    const store = new Store();
    store.setNotice("blocked", "hi");
    expect(store.state.language).toBe("hi");
    store.addComment("namaste", scoreResult({ language: "hi_codemix" }));
    expect(store.state.language).toBe("hi_codemix");
    expect(store.state.notice).toBeNull();
  });

  it("removes review items by id", () => {
    const store = new Store();
    store.setReview([reviewItem({ id: "a" }), reviewItem({ id: "b" })]);
    store.removeReviewItem("a");
    expect(store.state.review.map((r) => r.id)).toEqual(["b"]);
  });

  it("notifies subscribers and honours unsubscribe", () => {
    const store = new Store();
    let seen = 0;
    const unsubscribe = store.subscribe(() => {
      seen += 1;
    });
    store.setToast("hello");
    unsubscribe();
    store.setToast(null);
    expect(seen).toBe(1);
  });
});
