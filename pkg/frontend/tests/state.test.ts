import { describe, expect, it } from "vitest";

import { ViewStore } from "../src/state.js";

describe("ViewStore", () => {
  it("notifies subscribers on update", () => {
    const store = new ViewStore();
    const seen: (number | null)[] = [];
    store.subscribe((s) => seen.push(s.selection));
    store.update({ selection: 4 });
    store.update({ selection: null });
    expect(seen).toEqual([null, 4, null]);
  });

  it("serializes enqueued operations", async () => {
    const store = new ViewStore();
    const order: string[] = [];
    const slow = store.enqueue(async () => {
      order.push("slow-start");
      await new Promise((r) => setTimeout(r, 30));
      order.push("slow-end");
    });
    const fast = store.enqueue(async () => {
      order.push("fast");
    });
    await Promise.all([slow, fast]);
    expect(order).toEqual(["slow-start", "slow-end", "fast"]);
  });

  it("keeps the queue alive after a failed operation", async () => {
    const store = new ViewStore();
    await expect(
      store.enqueue(async () => {
        throw new Error("boom");
      }),
    ).rejects.toThrow("boom");
    await expect(store.enqueue(async () => "ok")).resolves.toBe("ok");
  });
});
