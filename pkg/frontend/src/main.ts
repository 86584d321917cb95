import { App } from "./app";
import { GatewayClient } from "./gateway";

const params = new URLSearchParams(window.location.search);
const base = params.get("gateway") ?? "http://127.0.0.1:8080";
const app = new App(document.getElementById("app") as HTMLElement, new GatewayClient(base));

const sessionId = params.get("session");
if (sessionId) void app.connect(sessionId);
