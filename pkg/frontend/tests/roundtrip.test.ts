// @vitest-environment jsdom
//
// Full review round-trip against the real service: audit a synthetic
// dataset, serve it, submit one verdict of each of the five classes
// through the mounted UI, export through the API, and require the result
// to be byte-identical to the export-clean command run on the same log.
import { execFile, spawn, type ChildProcess } from "node:child_process";
import { mkdtemp, readFile, rm } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { promisify } from "node:util";
import { afterAll, beforeAll, expect, test } from "vitest";

import { ApiClient } from "../src/api.js";
import { mountApp, type AppHandle } from "../src/app.js";
import type { VerdictClass } from "../src/types.js";

const run = promisify(execFile);
const SETUP_TIMEOUT = 180_000;

let work: string;
let server: ChildProcess | null = null;
let serverExit: Promise<void> = Promise.resolve();
let baseUrl = "";
let verdictLog = "";

function graphArgs(data: string): string[] {
  return [
    "--edges", join(data, "edges.txt"),
    "--labels", join(data, "labels.csv"),
    "--splits", join(data, "splits.csv"),
    "--features", join(data, "features.csv"),
  ];
}

async function startServer(args: string[]): Promise<string> {
  const child = spawn("graphaudit", args, {
    env: { ...process.env, PYTHONUNBUFFERED: "1" },
    stdio: ["ignore", "pipe", "pipe"],
  });
  server = child;
  serverExit = new Promise((resolve) => child.once("exit", () => resolve()));
  let feedback = "";
  const url = await new Promise<string>((resolve, reject) => {
    const watchdog = setTimeout(
      () => reject(new Error(`serve never came up: ${feedback}`)),
      30_000,
    );
    const onChunk = (chunk: Buffer): void => {
      feedback += chunk.toString("utf8");
      const match = feedback.match(/serving audit review on (http:\/\/[\d.]+:\d+)\//);
      if (match !== null) {
        clearTimeout(watchdog);
        resolve(match[1] as string);
      }
    };
    child.stdout?.on("data", onChunk);
    child.stderr?.on("data", onChunk);
    child.once("exit", (code) => {
      clearTimeout(watchdog);
      reject(new Error(`serve exited early (${code}): ${feedback}`));
    });
  });
  return url;
}

beforeAll(async () => {
  work = await mkdtemp(join(tmpdir(), "review-roundtrip-"));
  const data = join(work, "data");
  await run("graphaudit", [
    "gen-sbm", "--n", "80", "--classes", "3", "--p-in", "0.12",
    "--p-out", "0.01", "--seed", "9", "--out-dir", data,
  ]);
  await run("graphaudit", [
    "audit", ...graphArgs(data), "--train-base", "--threshold", "bayes:0.2",
    "--seed", "1", "--out", join(work, "report.json"),
  ]);
  verdictLog = join(work, "verdicts.jsonl");
  baseUrl = await startServer([
    "serve", ...graphArgs(data), "--report", join(work, "report.json"),
    "--verdicts", verdictLog, "--port", "0",
  ]);
}, SETUP_TIMEOUT);

afterAll(async () => {
  server?.kill("SIGTERM");
  await serverExit;
  if (work !== undefined) {
    await rm(work, { recursive: true, force: true });
  }
}, SETUP_TIMEOUT);

function select(app: AppHandle, selector: string): HTMLElement {
  const found = app.root.querySelector<HTMLElement>(selector);
  if (found === null) {
    throw new Error(`nothing matches ${selector}`);
  }
  return found;
}

async function submitThroughUi(
  app: AppHandle,
  verdict: VerdictClass,
  correction: number | null,
): Promise<void> {
  select(app, `button[data-verdict="${verdict}"]`).click();
  if (correction !== null) {
    const picker = select(app, "#correction-select") as HTMLSelectElement;
    picker.value = String(correction);
    picker.dispatchEvent(new Event("change"));
  }
  select(app, "#submit-btn").click();
  await app.whenIdle();
}

test("five verdict classes round-trip to a byte-identical export", async () => {
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const app = mountApp(root, new ApiClient(baseUrl), { reviewer: "roundtrip" });
  await app.whenIdle();
  expect(select(app, "#queue-pos").textContent).toBe("1 / 80");
  expect(select(app, "#progress-text").textContent).toMatch(/^0 \/ 80 reviewed/);

  // one verdict of each class, walking down the ranked queue; the two
  // mislabel classes need a corrected label before the client will post
  await submitThroughUi(app, "clear_mislabel", 1);
  await submitThroughUi(app, "likely_mislabel", 2);
  await submitThroughUi(app, "ambiguous", null);
  await submitThroughUi(app, "likely_ok", null);
  await submitThroughUi(app, "clear_ok", null);

  expect(select(app, "#progress-text").textContent).toMatch(/^5 \/ 80 reviewed/);
  expect(app.root.querySelectorAll("#progress-bar .seg")).toHaveLength(5);

  // the log on disk now carries all five classes with server timestamps
  const logLines = (await readFile(verdictLog, "utf8")).trim().split("\n");
  expect(logLines).toHaveLength(5);
  const classes = logLines.map((l) => (JSON.parse(l) as { verdict: string }).verdict);
  expect(new Set(classes).size).toBe(5);

  // export through the UI…
  select(app, "#export-btn").click();
  await app.whenIdle();
  const exported = app.lastExport();
  expect(exported).not.toBeNull();

  // …and through the command line on the very same verdict log
  const data = join(work, "data");
  await run("graphaudit", [
    "export-clean", ...graphArgs(data), "--verdicts", verdictLog,
    "--out-labels", join(work, "clean_labels.csv"),
    "--out-splits", join(work, "clean_splits.csv"),
  ]);
  const labelBytes = await readFile(join(work, "clean_labels.csv"));
  const splitBytes = await readFile(join(work, "clean_splits.csv"));
  expect(Buffer.compare(Buffer.from(exported!.label_csv, "utf8"), labelBytes)).toBe(0);
  expect(Buffer.compare(Buffer.from(exported!.split_csv, "utf8"), splitBytes)).toBe(0);
}, 120_000);

test("a fresh mount reproduces the reviewed state from the service", async () => {
  const root = document.createElement("div");
  document.body.replaceChildren(root);
  const app = mountApp(root, new ApiClient(baseUrl), { reviewer: "roundtrip" });
  await app.whenIdle();
  expect(select(app, "#progress-text").textContent).toMatch(/^5 \/ 80 reviewed/);
  expect(select(app, ".reviewed-note").textContent).toMatch(/clear mislabel/);
}, 60_000);
