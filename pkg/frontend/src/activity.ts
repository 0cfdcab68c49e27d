// Per-contract activity log: every deploy/invoke/call appends an entry so
// successive interactions can be compared side by side. Held in memory
// for the session, newest first.

export type ActivityKind = 'deploy' | 'invoke' | 'call' | 'error';

export interface ActivityEntry {
  at: number;
  contract: string;
  kind: ActivityKind;
  summary: string;
  detail: string;
}

export class ActivityLog {
  private entries: ActivityEntry[] = [];

  append(entry: ActivityEntry): void {
    this.entries.unshift(entry);
  }

  forContract(contract: string): ActivityEntry[] {
    return this.entries.filter((entry) => entry.contract === contract);
  }

  get all(): ActivityEntry[] {
    return [...this.entries];
  }
}
