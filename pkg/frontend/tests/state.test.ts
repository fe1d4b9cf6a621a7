import { describe, expect, it } from "vitest";

import { freshStore, clusteringResponse, PROJECTION } from "./fixtures.js";

describe("SessionStore", () => {
  it("accepts responses tagged with the current revision", () => {
    const store = freshStore();
    expect(store.acceptProjection(PROJECTION)).toBe(true);
    expect(store.projection).not.toBeNull();
  });

  it("drops stale responses from an older revision", () => {
    const store = freshStore();
    store.bumpRevision(2);
    expect(store.acceptProjection({ ...PROJECTION, revision: 1 })).toBe(false);
    expect(store.projection).toBeNull();
    expect(store.acceptClustering(clusteringResponse([2, 2], 1))).toBe(false);
  });

  it("marks fitted models stale after a view mutation", () => {
    const store = freshStore();
    store.acceptClustering(clusteringResponse([3, 1]));
    expect(store.clusteringFresh).toBe(true);
    store.bumpRevision(1);
    expect(store.clusteringFresh).toBe(false);
  });

  it("never regresses the revision", () => {
    const store = freshStore();
    store.bumpRevision(3);
    store.bumpRevision(2);
    expect(store.revision).toBe(3);
  });

  it("notifies selection listeners once per change", () => {
    const store = freshStore();
    let fired = 0;
    store.on("selection", () => fired++);
    store.setSelection(["p1", "p2"]);
    expect(fired).toBe(1);
    expect(store.selection).toEqual(new Set(["p1", "p2"]));
    store.clearSelection();
    expect(fired).toBe(2);
    expect(store.selection.size).toBe(0);
  });

  it("unsubscribes cleanly", () => {
    const store = freshStore();
    let fired = 0;
    const off = store.on("revision", () => fired++);
    store.bumpRevision(1);
    off();
    store.bumpRevision(2);
    expect(fired).toBe(1);
  });

  it("exposes numeric feature names in order", () => {
    const store = freshStore();
    expect(store.numericFeatureNames()).toEqual(["age", "weight", "height"]);
  });
});
