// Application shell: wires the gateway client, the stream-ordered view
// model, and the DOM (chat panel, phase header, canvas, timeline).

import { GatewayClient, GatewayError, WebSocketLike } from "./gateway";
import { demoSession } from "./demo-data";
import { Plane } from "./projection";
import { Draw2D, drawScene } from "./render";
import { SessionViewModel } from "./viewmodel";
import type { TrajectoryGeometry, WireMessage } from "./types";

const TEMPLATE = `
  <div id="banner" class="banner" hidden></div>
  <div class="controls">
    <label>mode
      <select id="mode-select">
        <option value="bidirectional">bidirectional</option>
        <option value="unidirectional">unidirectional</option>
        <option value="no_modification">no_modification</option>
      </select>
    </label>
    <button id="start-btn">start demo session</button>
    <input id="session-input" placeholder="session id" />
    <button id="connect-btn">connect</button>
    <label>plane
      <select id="plane-select">
        <option value="xz">xz</option>
        <option value="xy">xy</option>
        <option value="yz">yz</option>
      </select>
    </label>
  </div>
  <div class="status">
    <span id="phase" class="phase">disconnected</span>
    <span id="mode-label"></span>
    <span id="executor"></span>
    <span class="hash">traj <code id="hash">-</code></span>
  </div>
  <div class="main">
    <canvas id="scene" width="640" height="420"></canvas>
    <div class="side">
      <div id="transcript" class="transcript"></div>
      <ol id="timeline" class="timeline"></ol>
      <form id="chat-form">
        <input id="chat-input" placeholder="say something to the robot" autocomplete="off" />
        <button id="send-btn" type="submit">send</button>
      </form>
      <button id="stop-btn">stop</button>
    </div>
  </div>
`;

export interface AppOptions {
  draw?: Draw2D | null; // injected in tests; defaults to the canvas 2D context
  reconnectDelayMs?: number;
}

export class App {
  readonly vm = new SessionViewModel();
  renderedHash = ""; // hash of the geometry currently drawn
  geometry: TrajectoryGeometry | null = null;
  plane: Plane = "xz";

  private ws: WebSocketLike | null = null;
  private draw: Draw2D | null;
  private refreshing = false;
  private closedByUs = false;

  private readonly banner: HTMLElement;
  private readonly transcriptEl: HTMLElement;
  private readonly timelineEl: HTMLElement;
  private readonly phaseEl: HTMLElement;
  private readonly modeEl: HTMLElement;
  private readonly executorEl: HTMLElement;
  private readonly hashEl: HTMLElement;
  private readonly input: HTMLInputElement;
  private readonly canvas: HTMLCanvasElement;

  constructor(
    private readonly root: HTMLElement,
    private readonly gateway: GatewayClient,
    private readonly options: AppOptions = {},
  ) {
    root.innerHTML = TEMPLATE;
    this.banner = this.el("#banner");
    this.transcriptEl = this.el("#transcript");
    this.timelineEl = this.el("#timeline");
    this.phaseEl = this.el("#phase");
    this.modeEl = this.el("#mode-label");
    this.executorEl = this.el("#executor");
    this.hashEl = this.el("#hash");
    this.input = this.el<HTMLInputElement>("#chat-input");
    this.canvas = this.el<HTMLCanvasElement>("#scene");
    this.draw =
      options.draw !== undefined
        ? options.draw
        : (this.canvas.getContext("2d") as unknown as Draw2D | null);

    this.el("#start-btn").addEventListener("click", () => void this.startDemo());
    this.el("#connect-btn").addEventListener("click", () => {
      const id = this.el<HTMLInputElement>("#session-input").value.trim();
      if (id) void this.connect(id);
    });
    this.el("#chat-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.send();
    });
    this.el("#stop-btn").addEventListener("click", () => void this.stopSession());
    this.el<HTMLSelectElement>("#plane-select").addEventListener("change", (ev) => {
      this.plane = (ev.target as HTMLSelectElement).value as Plane;
      this.redraw();
    });
  }

  private el<T extends HTMLElement = HTMLElement>(selector: string): T {
    const found = this.root.querySelector<T>(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found;
  }

  showBanner(text: string, kind: "error" | "info" = "error"): void {
    this.banner.textContent = text;
    this.banner.dataset.kind = kind;
    this.banner.hidden = false;
  }

  clearBanner(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
  }

  async startDemo(): Promise<void> {
    const mode = this.el<HTMLSelectElement>("#mode-select").value;
    try {
      const created = await this.gateway.createSession(demoSession(mode));
      await this.connect(created.id);
    } catch (err) {
      this.reportError(err);
    }
  }

  async connect(sessionId: string): Promise<void> {
    this.disconnect();
    try {
      await this.gateway.state(sessionId);
    } catch (err) {
      if (err instanceof GatewayError && err.status === 404) {
        this.showBanner(`unknown session "${sessionId}" (404)`);
      } else {
        this.reportError(err);
      }
      return;
    }
    this.clearBanner();
    this.vm.reset(sessionId);
    this.renderedHash = "";
    this.geometry = null;
    this.openStream();
    await this.refreshGeometry();
    this.updateDom();
  }

  disconnect(): void {
    this.closedByUs = true;
    this.ws?.close();
    this.ws = null;
  }

  private openStream(): void {
    this.closedByUs = false;
    const ws = this.gateway.openEvents(this.vm.sessionId);
    this.ws = ws;
    ws.onmessage = (ev) => {
      const message = JSON.parse(String(ev.data)) as WireMessage;
      this.handleMessage(message);
    };
    ws.onclose = () => {
      if (this.closedByUs) return;
      this.showBanner("connection lost - reconnecting", "info");
      const delay = this.options.reconnectDelayMs ?? 1000;
      setTimeout(() => {
        if (!this.closedByUs && this.vm.sessionId) void this.reconnect();
      }, delay);
    };
    ws.onerror = () => undefined;
  }

  private async reconnect(): Promise<void> {
    try {
      await this.gateway.state(this.vm.sessionId);
    } catch (err) {
      if (err instanceof GatewayError && err.status === 404) {
        this.showBanner(`session "${this.vm.sessionId}" is gone (404) - service restarted?`);
        return;
      }
      const delay = this.options.reconnectDelayMs ?? 1000;
      setTimeout(() => void this.reconnect(), delay);
      return;
    }
    this.clearBanner();
    this.openStream(); // backlog replay is deduplicated by sequence number
  }

  handleMessage(message: WireMessage): void {
    this.vm.applyMessage(message);
    if (this.vm.gapDetected) {
      this.showBanner("event stream gap detected - some history was missed", "info");
    }
    if (this.vm.trajectoryHash && this.vm.trajectoryHash !== this.renderedHash) {
      void this.refreshGeometry();
    }
    this.updateDom();
  }

  async refreshGeometry(): Promise<void> {
    if (this.refreshing || !this.vm.sessionId) return;
    this.refreshing = true;
    try {
      const geometry = await this.gateway.trajectory(this.vm.sessionId);
      this.geometry = geometry;
      this.renderedHash = geometry.trajectory_hash;
      this.redraw();
      this.updateDom();
    } catch (err) {
      this.reportError(err);
    } finally {
      this.refreshing = false;
    }
  }

  async send(): Promise<void> {
    const text = this.input.value.trim();
    if (!text || !this.vm.sessionId) return;
    this.input.value = "";
    try {
      if (this.vm.awaitingAnswer) {
        await this.gateway.sendClarification(this.vm.sessionId, text);
      } else {
        await this.gateway.sendUtterance(this.vm.sessionId, text);
      }
      this.clearBanner();
    } catch (err) {
      this.reportError(err); // 409 wrong phase, 422, etc. rendered inline
    }
  }

  async stopSession(): Promise<void> {
    if (!this.vm.sessionId) return;
    try {
      await this.gateway.stop(this.vm.sessionId);
    } catch (err) {
      this.reportError(err);
    }
  }

  private reportError(err: unknown): void {
    if (err instanceof GatewayError) {
      this.showBanner(err.status ? `${err.status}: ${err.message}` : err.message);
    } else {
      this.showBanner(String(err));
    }
  }

  redraw(): void {
    if (!this.draw || !this.geometry) return;
    drawScene(this.draw, this.canvas.width, this.canvas.height, {
      original: this.geometry.original.map((w) => w.pos),
      current: this.geometry.current.map((w) => w.pos),
      landmarks: this.geometry.landmarks,
      executor: this.vm.executor?.pos ?? null,
      plane: this.plane,
    });
  }

  updateDom(): void {
    this.phaseEl.textContent = this.vm.phase;
    this.phaseEl.dataset.phase = this.vm.phase;
    this.modeEl.textContent = this.vm.mode;
    this.hashEl.textContent = this.renderedHash ? this.renderedHash.slice(0, 12) : "-";
    this.hashEl.dataset.fullHash = this.renderedHash;
    if (this.vm.executor) {
      const [x, y, z] = this.vm.executor.pos;
      this.executorEl.textContent =
        `pos (${x.toFixed(2)}, ${y.toFixed(2)}, ${z.toFixed(2)}) ` +
        `vel ${this.vm.executor.vel.toFixed(3)} m/s force ${this.vm.executor.force.toFixed(1)} N`;
    }
    this.input.placeholder = this.vm.awaitingAnswer
      ? "answer the question"
      : "say something to the robot";

    this.transcriptEl.replaceChildren(
      ...this.vm.transcript.map((bubble) => {
        const div = document.createElement("div");
        div.className = `bubble ${bubble.role}${bubble.awaiting ? " awaiting" : ""}`;
        div.dataset.role = bubble.role;
        div.textContent = bubble.text;
        return div;
      }),
    );

    this.timelineEl.replaceChildren(
      ...this.vm.timeline.map((entry) => {
        const li = document.createElement("li");
        li.dataset.kind = entry.kind;
        li.textContent = `${(entry.progress * 100).toFixed(1)}% ${entry.kind}`;
        return li;
      }),
    );

    this.redraw(); // executor marker moves with state broadcasts
  }
}
