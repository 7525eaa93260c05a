import { describe, expect, it } from "vitest";

import { commandFor } from "../src/keys.js";
import type { Command } from "../src/keys.js";

describe("keyboard layout", () => {
  const layout: [string, Command][] = [
    ["ArrowUp", "prev-cluster"],
    ["k", "prev-cluster"],
    ["ArrowDown", "next-cluster"],
    ["j", "next-cluster"],
    ["ArrowLeft", "prev-member"],
    ["h", "prev-member"],
    ["ArrowRight", "next-member"],
    ["l", "next-member"],
    ["y", "confirm-duplicates"],
    ["Y", "confirm-duplicates"],
    ["n", "mark-distinct"],
    ["N", "mark-distinct"],
    ["p", "toggle-pending"],
    ["Enter", "open-image"],
    ["o", "open-image"],
    ["Escape", "close-overlay"],
    ["PageUp", "page-back"],
    ["PageDown", "page-forward"],
    ["r", "refresh"],
  ];

  it.each(layout)("maps %s to %s", (key, command) => {
    expect(commandFor({ key })).toBe(command);
  });

  it("ignores unmapped keys", () => {
    expect(commandFor({ key: "q" })).toBeNull();
    expect(commandFor({ key: "Tab" })).toBeNull();
    expect(commandFor({ key: " " })).toBeNull();
  });

  it("lets browser shortcuts with modifiers through untouched", () => {
    expect(commandFor({ key: "y", ctrlKey: true })).toBeNull();
    expect(commandFor({ key: "n", metaKey: true })).toBeNull();
    expect(commandFor({ key: "ArrowDown", altKey: true })).toBeNull();
  });

  it("suppresses everything but Escape while typing", () => {
    expect(commandFor({ key: "y", editing: true })).toBeNull();
    expect(commandFor({ key: "ArrowDown", editing: true })).toBeNull();
    expect(commandFor({ key: "Escape", editing: true })).toBe("close-overlay");
  });
});
