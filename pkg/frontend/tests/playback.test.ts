import { describe, expect, it } from "vitest";

import { LogParseError, PlaybackSession, parseEpisodeLog } from "../src/playback.js";

function makeLog(steps: number, withCollisionAt?: number): string {
  const lines = [
    JSON.stringify({ scenario: "doorway", k: 2, seed: 0, config_hash: "x" }),
  ];
  for (let t = 0; t < steps; t++) {
    const coll = withCollisionAt === t ? [1] : [];
    lines.push(
      JSON.stringify({
        t,
        agents: [
          { id: 0, x: t * 0.1, y: 0, psi: 0, v: 1.0, action: "GO", reward: -1, coll, succ: t === steps - 1 },
          { id: 1, x: -t * 0.1, y: 1, psi: Math.PI, v: 1.0, action: "GO", reward: -1, coll: [], succ: false },
        ],
      }),
    );
  }
  lines.push(JSON.stringify({ reason: "max_steps", length: steps }));
  return lines.join("\n") + "\n";
}

describe("parsing", () => {
  it("parses header, steps, and footer", () => {
    const log = parseEpisodeLog(makeLog(100));
    expect(log.header.k).toBe(2);
    expect(log.steps).toHaveLength(100);
    expect(log.reason).toBe("max_steps");
    expect(log.truncated).toBe(false);
  });

  it("plays a truncated log up to the last complete step", () => {
    const full = makeLog(50);
    const cut = full.split("\n").slice(0, 31).join("\n"); // header + 30 steps
    const log = parseEpisodeLog(cut);
    expect(log.steps).toHaveLength(30);
    expect(log.truncated).toBe(true);
    expect(log.reason).toBeNull();
  });

  it("rejects non-contiguous steps", () => {
    const lines = [
      JSON.stringify({ scenario: "s", k: 1, seed: 0, config_hash: "x" }),
      JSON.stringify({ t: 0, agents: [] }),
      JSON.stringify({ t: 2, agents: [] }),
    ];
    expect(() => parseEpisodeLog(lines.join("\n"))).toThrow(LogParseError);
  });
});

describe("playback session", () => {
  it("a 100-step log at speed 1 with dt 0.1 lasts 10 seconds", () => {
    const session = new PlaybackSession(parseEpisodeLog(makeLog(100)));
    expect(session.duration()).toBeCloseTo(10.0);
    session.speed = 2.0;
    expect(session.duration()).toBeCloseTo(5.0);
  });

  it("seeking to the end shows the final poses", () => {
    const session = new PlaybackSession(parseEpisodeLog(makeLog(100)));
    const frame = session.seek(99);
    expect(frame.t).toBe(99);
    expect(frame.agents[0].x).toBeCloseTo(9.9);
    expect(frame.agents[0].succ).toBe(true);
  });

  it("renders the collision flash at the logged step", () => {
    const session = new PlaybackSession(parseEpisodeLog(makeLog(60, 40)));
    expect(session.seek(40).agents[0].coll).toEqual([1]);
    expect(session.seek(39).agents[0].coll).toEqual([]);
  });

  it("is a pure function of (log, cursor): rewind reproduces frames", () => {
    const session = new PlaybackSession(parseEpisodeLog(makeLog(30)));
    const forward = JSON.stringify(session.seek(20));
    session.seek(5);
    session.seek(29);
    expect(JSON.stringify(session.seek(20))).toBe(forward);
  });

  it("clamps seeks to the valid range", () => {
    const session = new PlaybackSession(parseEpisodeLog(makeLog(10)));
    expect(session.seek(-5).t).toBe(0);
    expect(session.seek(999).t).toBe(9);
  });

  it("tick advances by wall-clock time at the configured speed", () => {
    const session = new PlaybackSession(parseEpisodeLog(makeLog(100)));
    session.tick(0.35); // 3 steps at dt=0.1
    expect(session.cursor).toBe(3);
    session.speed = 3.0;
    session.tick(0.1);
    expect(session.cursor).toBe(6);
  });
});
