// Canvas scene: station on the left, object on the right, the arm at its
// current position with the gripper jaws opened to the grip aperture.

import type { ViewState } from "./state.js";

const TRACK_Y = 150;
const STATION_X = 60;
const OBJECT_X = 540;

export function render(ctx: CanvasRenderingContext2D, view: ViewState): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);

  drawHud(ctx, view);
  const server = view.server;
  if (server === null) {
    overlay(ctx, "waiting for session...");
    return;
  }

  // track and station
  ctx.strokeStyle = "#3a4458";
  ctx.lineWidth = 4;
  ctx.beginPath();
  ctx.moveTo(STATION_X, TRACK_Y);
  ctx.lineTo(OBJECT_X, TRACK_Y);
  ctx.stroke();
  ctx.fillStyle = "#39507a";
  ctx.fillRect(STATION_X - 26, TRACK_Y - 42, 26, 84);
  ctx.fillStyle = "#9fb4d8";
  ctx.font = "12px monospace";
  ctx.fillText("station", STATION_X - 32, TRACK_Y + 62);

  // object: size hidden in blind mode
  if (server.object_size_visible && server.object_size !== null) {
    const radius = 10 + server.object_size * 26;
    ctx.fillStyle = "#c2783c";
    ctx.beginPath();
    ctx.arc(OBJECT_X, TRACK_Y, radius, 0, Math.PI * 2);
    ctx.fill();
  } else {
    ctx.fillStyle = "#5e533c";
    ctx.fillRect(OBJECT_X - 18, TRACK_Y - 18, 36, 36);
    ctx.fillStyle = "#d8c89f";
    ctx.font = "20px monospace";
    ctx.fillText("?", OBJECT_X - 6, TRACK_Y + 7);
  }

  // arm with gripper jaws opened to the aperture
  const fraction = server.travel_steps > 0 ? server.p / server.travel_steps : 0;
  const armX = STATION_X + fraction * (OBJECT_X - STATION_X - 40);
  const jawGap = 6 + server.grip_size * 30;
  ctx.strokeStyle = server.retreat ? "#c05050" : "#7fba6a";
  ctx.lineWidth = 6;
  ctx.beginPath();
  ctx.moveTo(STATION_X, TRACK_Y - 20);
  ctx.lineTo(armX, TRACK_Y - 20);
  ctx.stroke();
  ctx.lineWidth = 4;
  for (const sign of [-1, 1]) {
    ctx.beginPath();
    ctx.moveTo(armX, TRACK_Y - 20);
    ctx.lineTo(armX + 24, TRACK_Y - 20 + sign * jawGap * 0.5 + sign * 4);
    ctx.stroke();
  }

  if (server.terminal) {
    banner(ctx, `grasped! episode ${server.episode} in ${server.step + 1} steps`);
  }
  if (view.connection === "paused") {
    overlay(ctx, "connection lost - session paused");
  } else if (view.connection === "closed") {
    overlay(ctx, "session over");
  }
}

function drawHud(ctx: CanvasRenderingContext2D, view: ViewState): void {
  ctx.fillStyle = "#c8d2e8";
  ctx.font = "13px monospace";
  const server = view.server;
  const lines = [
    `connection: ${view.connection}   input: ${view.inputMode}`,
    server
      ? `episode ${server.episode}  step ${server.step}  p ${server.p}/${server.travel_steps}` +
        `  grip ${server.grip} (${server.grip_size.toFixed(2)})  reward ${server.last_reward}`
      : "no state yet",
    `pushes this episode: ${view.pushesThisEpisode}` +
      (view.lastEpisode
        ? `   last episode: ${view.lastEpisode.steps} steps, ${view.lastEpisode.pushes} pushes`
        : ""),
  ];
  if (view.summary) {
    lines.push(
      `summary: ${view.summary.episodes_completed} episodes, ` +
        `${view.summary.total_steps} steps, ${view.summary.total_pushes} pushes`,
    );
  }
  if (view.lastError) lines.push(`server error: ${view.lastError}`);
  lines.forEach((line, i) => ctx.fillText(line, 14, 22 + i * 18));
}

function banner(ctx: CanvasRenderingContext2D, text: string): void {
  ctx.fillStyle = "rgba(72, 128, 64, 0.85)";
  ctx.fillRect(0, 96, ctx.canvas.width, 34);
  ctx.fillStyle = "#eef6ea";
  ctx.font = "16px monospace";
  ctx.fillText(text, 20, 118);
}

function overlay(ctx: CanvasRenderingContext2D, text: string): void {
  ctx.fillStyle = "rgba(12, 14, 20, 0.72)";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.fillStyle = "#dfe6f2";
  ctx.font = "18px monospace";
  ctx.fillText(text, 40, TRACK_Y);
}
