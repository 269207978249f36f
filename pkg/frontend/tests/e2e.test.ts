// @vitest-environment jsdom
//
// Scripted browser session against a real server process: loads the
// projector example, applies its eight published moves by clicking the
// rendered subterm positions and move buttons, then checks the display
// against the server's own rendering of the final term and verifies the
// exported derivation with the command-line replayer.

import { spawn, spawnSync, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { Controller } from "../src/controller.js";
import { mount } from "../src/main.js";

const PORT = 8123 + (process.pid % 512);
const BASE = `http://127.0.0.1:${PORT}`;
const REPO = join(dirname(fileURLToPath(import.meta.url)), "..", "..");

const ROW1 =
  "apply(projector(V:alpha@a, V:alpha@a), " +
  "timesV(1/sqrt2, plusV(V:beta@a, timesV(-1, V:gamma@a))))";

const ROW9 =
  "timesV(timesS(1/sqrt2, plusS(ip(V:alpha@a, V:beta@a), " +
  "timesS(-1, ip(V:alpha@a, V:gamma@a)))), V:alpha@a)";

const PUBLISHED: Array<[string, "fwd" | "rev", string]> = [
  ["multiplyRightApply", "fwd", "eps"],
  ["expandRightApply", "fwd", "2"],
  ["multiplyRightApply", "fwd", "2.2"],
  ["applyProjector", "fwd", "2.1"],
  ["applyProjector", "fwd", "2.2.2"],
  ["multiplyLeftV", "fwd", "2.2"],
  ["expandLeftV", "rev", "2"],
  ["multiplyLeftV", "fwd", "eps"],
];

let server: ChildProcess;

async function serverReady(): Promise<void> {
  for (let i = 0; i < 100; i++) {
    try {
      const r = await fetch(`${BASE}/openapi.json`);
      if (r.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error("server did not come up");
}

beforeAll(async () => {
  server = spawn("python3", ["-m", "qrewrite.cli", "serve",
                             "--port", String(PORT)],
                 { cwd: REPO, stdio: "ignore" });
  await serverReady();
}, 30_000);

afterAll(() => {
  server.kill();
});

function installShell(): void {
  const html = readFileSync(join(REPO, "frontend", "index.html"), "utf-8");
  const body = html.slice(html.indexOf("<body>") + 6, html.indexOf("</body>"))
    .replace(/<script[\s\S]*?<\/script>/g, "");
  document.body.innerHTML = body;
}

function waitFor(controller: Controller,
                 ready: () => boolean, what: string): Promise<void> {
  return new Promise((resolve, reject) => {
    const deadline = Date.now() + 20_000;
    const poll = () => {
      if (ready()) return resolve();
      if (Date.now() > deadline) return reject(new Error(`timeout: ${what}`));
      setTimeout(poll, 25);
    };
    poll();
  });
}

function idle(controller: Controller): () => boolean {
  return () => !controller.state.busy && controller.state.moves !== null;
}

describe("scripted derivation session", () => {
  it("walks the eight published moves by clicking, then exports",
     { timeout: 60_000 }, async () => {
    installShell();
    const client = new Client(BASE);
    const controller = new Controller(client);
    mount(controller);

    const input = document.getElementById("term-input") as HTMLTextAreaElement;
    const term = document.getElementById("term")!;
    input.value = ROW1;
    (document.getElementById("load") as HTMLButtonElement).click();
    await waitFor(controller,
                  () => controller.state.sessionId !== null &&
                        idle(controller)(),
                  "session load");
    expect(controller.state.sort).toBe("vector[a]");
    expect(term.textContent).toBe(controller.state.dirac);

    for (const [ruleId, direction, position] of PUBLISHED) {
      // click the highlighted subterm for the published position
      const highlight = term.querySelector<HTMLElement>(
        `[data-pos="${position}"]`);
      expect(highlight, `highlight for ${position}`).not.toBeNull();
      highlight!.click();
      expect(controller.state.selected).toBe(position);

      // the filtered list must offer the published move; click it
      const stepBefore = controller.state.stepCount;
      const buttons = Array.from(
        document.querySelectorAll<HTMLButtonElement>("#moves .move"));
      const label = `${ruleId} ${direction} @ ${position}`;
      const button = buttons.find((b) => b.textContent === label);
      expect(button, `move button ${label}`).toBeDefined();
      button!.click();
      await waitFor(controller,
                    () => controller.state.stepCount === stepBefore + 1 &&
                          idle(controller)(),
                    `apply ${label}`);
      expect(term.textContent).toBe(controller.state.dirac);
    }

    expect(controller.state.stepCount).toBe(8);
    expect(controller.state.history.map((h) => h.ruleId)).toEqual(
      PUBLISHED.map(([ruleId]) => ruleId));

    // the displayed Dirac text equals the server's rendering of the
    // final term, obtained through an independent session
    const reference = await client.createSession(ROW9);
    expect(term.textContent).toBe(reference.dirac);

    // the exported derivation verifies under the CLI replayer
    const exported = await controller.exportDerivation();
    const dir = mkdtempSync(join(tmpdir(), "qrewrite-ui-"));
    const file = join(dir, "session.deriv");
    writeFileSync(file, exported);
    const replay = spawnSync("python3",
                             ["-m", "qrewrite.cli", "replay", file],
                             { cwd: REPO, encoding: "utf-8" });
    expect(replay.status).toBe(0);
    expect(replay.stdout).toContain("8 steps verified");
  });

  it("shows the error span for malformed input",
     { timeout: 30_000 }, async () => {
    installShell();
    const controller = new Controller(new Client(BASE));
    mount(controller);
    const input = document.getElementById("term-input") as HTMLTextAreaElement;
    input.value = "ip(V:x@a, V:y@b)";
    (document.getElementById("load") as HTMLButtonElement).click();
    await waitFor(controller, () => controller.state.error !== null,
                  "error surfaced");
    expect(controller.state.sessionId).toBeNull();
    const marked = document.querySelector("#error-text .error-span");
    expect(marked).not.toBeNull();
    expect(document.getElementById("error")!.hidden).toBe(false);
  });

  it("undo returns the display to the previous rendering",
     { timeout: 30_000 }, async () => {
    installShell();
    const controller = new Controller(new Client(BASE));
    mount(controller);
    const input = document.getElementById("term-input") as HTMLTextAreaElement;
    input.value = ROW1;
    (document.getElementById("load") as HTMLButtonElement).click();
    await waitFor(controller,
                  () => controller.state.sessionId !== null &&
                        idle(controller)(),
                  "session load");
    const before = document.getElementById("term")!.textContent;
    const firstMove = document.querySelector<HTMLButtonElement>("#moves .move")!;
    firstMove.click();
    await waitFor(controller,
                  () => controller.state.stepCount === 1 && idle(controller)(),
                  "apply");
    expect(document.getElementById("term")!.textContent).not.toBe(before);
    (document.getElementById("undo") as HTMLButtonElement).click();
    await waitFor(controller,
                  () => controller.state.stepCount === 0 && idle(controller)(),
                  "undo");
    expect(document.getElementById("term")!.textContent).toBe(before);
    expect(controller.state.history).toHaveLength(0);
  });

  it("reload starts from an empty workspace",
     { timeout: 30_000 }, async () => {
    installShell();
    const controller = new Controller(new Client(BASE));
    mount(controller);
    expect(controller.state.sessionId).toBeNull();
    expect(document.getElementById("term")!.textContent).toContain(
      "load a term");
  });
});
