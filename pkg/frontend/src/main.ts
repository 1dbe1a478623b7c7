// Browser entry point: wires the socket, the keyboard and the canvas
// together. All decisions live in the imported modules; this file only
// shuttles events and paints display lists.
import { ClientState, sessionFromQuery, socketUrl } from "./client.js";
import { defaultBindings } from "./bindings.js";
import { InputLoop } from "./input.js";
import { renderCoachView, renderInfluencerView, type DrawOp, type Screen } from "./views.js";
import type { ClientMessage } from "./schema.js";

const canvas = document.getElementById("stage") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const bannerEl = document.getElementById("banner")!;
const statusEl = document.getElementById("status")!;
const screen: Screen = { width: canvas.width, height: canvas.height };

const { session, role } = sessionFromQuery(window.location.search);
const state = new ClientState();
let socket: WebSocket;

function sendMessage(message: ClientMessage): void {
  if (socket.readyState === WebSocket.OPEN) {
    socket.send(JSON.stringify(message));
  }
}

const input = new InputLoop(defaultBindings(), sendMessage, () => state.paused);

function connect(): void {
  socket = new WebSocket(socketUrl(window.location.origin, session, role));
  socket.addEventListener("open", () => state.socketOpened());
  socket.addEventListener("message", (event) => state.onMessage(String(event.data)));
  socket.addEventListener("close", () => {
    state.socketClosed();
    // The client holds no game state, so rejoining just resumes rendering
    // at the next snapshot the server sends.
    setTimeout(connect, 1000);
  });
}
connect();

document.addEventListener("keydown", (event) => {
  if (event.key === "Tab") event.preventDefault();
  input.keyDown(event.key, performance.now());
});
document.addEventListener("keyup", (event) => input.keyUp(event.key));

function paint(ops: DrawOp[]): void {
  ctx.clearRect(0, 0, screen.width, screen.height);
  for (const op of ops) {
    switch (op.shape) {
      case "line":
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.setLineDash(op.dashed ? [6, 4] : []);
        ctx.beginPath();
        ctx.moveTo(op.x1, op.y1);
        ctx.lineTo(op.x2, op.y2);
        ctx.stroke();
        break;
      case "rect":
        ctx.fillStyle = op.fill;
        ctx.fillRect(op.x, op.y, op.w, op.h);
        break;
      case "circle":
        ctx.setLineDash(op.dashed ? [6, 4] : []);
        ctx.strokeStyle = op.stroke;
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.arc(op.x, op.y, op.r, 0, Math.PI * 2);
        if (op.fill !== null) {
          ctx.fillStyle = op.fill;
          ctx.fill();
        }
        ctx.stroke();
        break;
      case "text":
        ctx.fillStyle = op.color;
        ctx.font = `${op.size}px sans-serif`;
        ctx.fillText(op.text, op.x, op.y);
        break;
    }
  }
  ctx.setLineDash([]);
}

function frame(now: number): void {
  input.tick(now);
  const snap = state.snapshot;
  if (snap !== null) {
    paint(snap.kind === "influencer_view" ? renderInfluencerView(snap, screen) : renderCoachView(snap, screen));
  }
  bannerEl.textContent = state.banner ?? "";
  const seat = state.role ?? role ?? "auto";
  const pausedNote = state.paused ? " | paused" : "";
  statusEl.textContent = `session ${session} | seat ${seat} | ${state.phase}${pausedNote}`;
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
