// Episode-log playback: parse the engine's JSONL logs and expose a
// deterministic frame(cursor) view. Truncated logs play up to the last
// complete step, with a warning recorded.

export interface AgentFrame {
  id: number;
  x: number;
  y: number;
  psi: number;
  v: number;
  action: string;
  reward: number;
  coll: number[];
  succ: boolean;
}

export interface HumanFrame {
  id: number;
  x: number;
  y: number;
}

export interface StepFrame {
  t: number;
  agents: AgentFrame[];
  humans: HumanFrame[];
}

export interface ParsedLog {
  header: { scenario: string; k: number; seed: number; config_hash: string };
  steps: StepFrame[];
  reason: string | null;
  truncated: boolean;
}

export class LogParseError extends Error {}

export function parseEpisodeLog(text: string): ParsedLog {
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length < 1) throw new LogParseError("empty log");
  let header: any;
  try {
    header = JSON.parse(lines[0]);
  } catch {
    throw new LogParseError("header line is not valid JSON");
  }
  if (typeof header.k !== "number") {
    throw new LogParseError("header is missing the agent count");
  }

  const steps: StepFrame[] = [];
  let reason: string | null = null;
  let truncated = true;
  for (let i = 1; i < lines.length; i++) {
    let record: any;
    try {
      record = JSON.parse(lines[i]);
    } catch {
      break; // truncated mid-line: keep what we have
    }
    if (record.t !== undefined) {
      if (record.t !== steps.length) {
        throw new LogParseError(`step records not contiguous at t=${record.t}`);
      }
      steps.push({
        t: record.t,
        agents: record.agents,
        humans: record.humans ?? [],
      });
    } else if (record.reason !== undefined) {
      reason = record.reason;
      truncated = record.length !== steps.length;
      break;
    }
  }
  return { header, steps, reason, truncated };
}

/** Cursor over a parsed log; frame() is a pure function of (log, cursor). */
export class PlaybackSession {
  cursor = 0;
  speed = 1.0;

  constructor(public log: ParsedLog, public dt = 0.1) {}

  get length(): number {
    return this.log.steps.length;
  }

  /** Wall-clock duration at the current speed, seconds. */
  duration(): number {
    return (this.length * this.dt) / this.speed;
  }

  seek(step: number): StepFrame {
    this.cursor = Math.min(Math.max(step, 0), this.length - 1);
    return this.frame();
  }

  frame(): StepFrame {
    return this.log.steps[this.cursor];
  }

  /** Advance by elapsed wall-clock seconds; returns the new frame. */
  tick(elapsed: number): StepFrame {
    const stepsForward = Math.floor((elapsed * this.speed) / this.dt);
    return this.seek(this.cursor + Math.max(stepsForward, 0));
  }

  atEnd(): boolean {
    return this.cursor >= this.length - 1;
  }
}
