// UI acceptance flows against the contract-faithful fake gateway, in jsdom:
// assurance bubble + hash update for "go faster", question bubble for
// gibberish, silence in no_modification mode, 404/409 banners, gap detection.

import { beforeEach, describe, expect, it } from "vitest";

import { App } from "../src/app";
import { GatewayClient } from "../src/gateway";
import { FakeGateway } from "./fake-gateway";

async function flush(times = 4): Promise<void> {
  for (let i = 0; i < times; i++) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function makeApp(fake: FakeGateway): App {
  document.body.innerHTML = '<div id="app"></div>';
  const gateway = new GatewayClient("http://fake-gateway", {
    fetchFn: fake.fetchFn,
    wsFactory: fake.wsFactory,
  });
  return new App(document.getElementById("app") as HTMLElement, gateway, {
    draw: null,
    reconnectDelayMs: 1,
  });
}

async function startSession(app: App, mode: string): Promise<void> {
  (document.querySelector("#mode-select") as HTMLSelectElement).value = mode;
  (document.querySelector("#start-btn") as HTMLButtonElement).click();
  await flush();
}

async function say(text: string): Promise<void> {
  (document.querySelector("#chat-input") as HTMLInputElement).value = text;
  (document.querySelector("#chat-form") as HTMLFormElement).dispatchEvent(
    new Event("submit", { bubbles: true, cancelable: true }),
  );
  await flush();
}

function bubbles(role: string): Element[] {
  return Array.from(document.querySelectorAll(`.bubble[data-role="${role}"]`));
}

describe("App against a mock gateway", () => {
  let fake: FakeGateway;
  let app: App;

  beforeEach(() => {
    fake = new FakeGateway();
    app = makeApp(fake);
  });

  it("renders an assurance bubble and updates the shown hash for 'go faster'", async () => {
    await startSession(app, "bidirectional");
    const hashBefore = (document.querySelector("#hash") as HTMLElement).dataset.fullHash;
    expect(hashBefore).toBeTruthy();

    await say("go faster");

    expect(bubbles("user").map((b) => b.textContent)).toEqual(["go faster"]);
    expect(bubbles("assurance").map((b) => b.textContent)).toEqual(["I'm increasing the speed."]);
    const hashAfter = (document.querySelector("#hash") as HTMLElement).dataset.fullHash;
    expect(hashAfter).not.toBe(hashBefore);
    expect(app.renderedHash).toBe(hashAfter);
    // rendered geometry corresponds to exactly the hash the service reports
    expect(app.renderedHash).toBe(app.vm.trajectoryHash);
    expect(app.geometry?.trajectory_hash).toBe(app.vm.trajectoryHash);
  });

  it("renders a question bubble for gibberish and flags the awaiting state", async () => {
    await startSession(app, "bidirectional");
    await say("blargh blargh");

    const questions = bubbles("question");
    expect(questions).toHaveLength(1);
    expect(questions[0].className).toContain("awaiting");
    expect((document.querySelector("#phase") as HTMLElement).textContent).toBe(
      "awaiting_clarification",
    );
    expect((document.querySelector("#chat-input") as HTMLInputElement).placeholder).toBe(
      "answer the question",
    );

    // The next message answers the question and resolves the exchange.
    await say("slower please");
    expect(bubbles("assurance")).toHaveLength(1);
    expect(document.querySelector(".bubble.question.awaiting")).toBeNull();
    expect((document.querySelector("#phase") as HTMLElement).textContent).toBe("running");
  });

  it("shows no feedback bubble in no_modification mode and keeps the hash", async () => {
    await startSession(app, "no_modification");
    const hashBefore = app.renderedHash;
    await say("go faster");

    expect(bubbles("user")).toHaveLength(1);
    expect(bubbles("assurance")).toHaveLength(0);
    expect(bubbles("question")).toHaveLength(0);
    expect(app.renderedHash).toBe(hashBefore);
  });

  it("applies changes silently in unidirectional mode", async () => {
    await startSession(app, "unidirectional");
    const hashBefore = app.renderedHash;
    await say("go faster");
    expect(bubbles("assurance")).toHaveLength(0);
    expect(app.renderedHash).not.toBe(hashBefore);
    await say("mumble mumble");
    expect(bubbles("question")).toHaveLength(0);
  });

  it("shows a 404 banner for an unknown session id", async () => {
    await app.connect("not-a-session");
    const banner = document.querySelector("#banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("404");
  });

  it("renders wrong-phase errors inline", async () => {
    await startSession(app, "bidirectional");
    await app.stopSession();
    await flush();
    await say("go faster");
    const banner = document.querySelector("#banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("409");
  });

  it("transcript order matches the websocket event order", async () => {
    await startSession(app, "bidirectional");
    await say("go faster");
    await say("slower");
    const seqs = app.vm.transcript.map((b) => b.seq);
    expect([...seqs].sort((a, b) => a - b)).toEqual(seqs);
    const rendered = Array.from(document.querySelectorAll(".bubble")).map((b) => b.textContent);
    expect(rendered).toEqual(app.vm.transcript.map((b) => b.text));
  });

  it("detects sequence gaps and shows a banner", async () => {
    await startSession(app, "bidirectional");
    app.handleMessage({
      type: "event",
      event: { seq: 99, wall_time: 0, progress: 0, kind: "ignored", mode: "bidirectional", payload: {} },
    });
    const banner = document.querySelector("#banner") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("gap");
  });

  it("reconnects after a dropped socket without duplicating the transcript", async () => {
    await startSession(app, "bidirectional");
    await say("go faster");
    const before = app.vm.transcript.length;
    const session = fake.sessions.get(app.vm.sessionId)!;
    for (const socket of Array.from(session.sockets)) socket.dropFromServer();
    await flush(8);
    expect((document.querySelector("#banner") as HTMLElement).textContent).toBe("");
    expect(app.vm.transcript.length).toBe(before);
    await say("slower");
    expect(bubbles("assurance")).toHaveLength(2);
  });
});
