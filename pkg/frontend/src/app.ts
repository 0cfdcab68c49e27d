// Screen rendering and event wiring for the single-page console.
// All data access goes through WorkbenchApi; all form behavior comes from
// the models in forms.ts. The session token lives in memory only.

import { ActivityLog } from './activity.js';
import { ApiError, WorkbenchApi } from './api.js';
import {
  buildMethodForms,
  formatOutput,
  toWireValue,
  validateValue,
} from './forms.js';
import type { ContractDetails } from './types.js';

interface Session {
  api: WorkbenchApi;
  email: string;
}

export interface Shell {
  root: HTMLElement;
  session: Session | null;
  activity: ActivityLog;
}

export function createShell(root: HTMLElement, baseUrl: string): Shell {
  const shell: Shell = { root, session: null, activity: new ActivityLog() };
  renderLogin(shell, new WorkbenchApi(baseUrl));
  return shell;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

function query<T extends HTMLElement>(root: HTMLElement, selector: string): T {
  const found = root.querySelector<T>(selector);
  if (!found) throw new Error(`missing element ${selector}`);
  return found;
}

function showError(root: HTMLElement, error: unknown): void {
  const box = root.querySelector<HTMLElement>('[data-role="error"]');
  if (!box) return;
  if (error instanceof ApiError) {
    box.textContent = `${error.code}: ${error.message}`;
  } else {
    box.textContent = String(error);
  }
  box.hidden = false;
}

// -- login -------------------------------------------------------------

export function renderLogin(shell: Shell, api: WorkbenchApi): void {
  shell.root.innerHTML = `
    <section class="card narrow">
      <h1>Contract Workbench</h1>
      <div class="field"><label>Email</label>
        <input data-role="email" type="email" autocomplete="username"></div>
      <div class="field"><label>Password</label>
        <input data-role="password" type="password" autocomplete="current-password"></div>
      <div class="row">
        <button data-role="login">Log in</button>
        <button data-role="register" class="secondary">Register</button>
      </div>
      <p data-role="error" class="error" hidden></p>
    </section>`;
  const email = query<HTMLInputElement>(shell.root, '[data-role="email"]');
  const password = query<HTMLInputElement>(shell.root, '[data-role="password"]');

  const submit = async (registerFirst: boolean) => {
    try {
      if (registerFirst) {
        await api.register(email.value, password.value);
      }
      await api.login(email.value, password.value);
      shell.session = { api, email: email.value };
      await renderHome(shell);
    } catch (error) {
      showError(shell.root, error);
    }
  };
  query<HTMLButtonElement>(shell.root, '[data-role="login"]').addEventListener(
    'click', () => void submit(false));
  query<HTMLButtonElement>(shell.root, '[data-role="register"]')
    .addEventListener('click', () => void submit(true));
}

// -- home: networks and applications --------------------------------------

export async function renderHome(shell: Shell): Promise<void> {
  const session = shell.session;
  if (!session) return;
  const [networks, apps] = await Promise.all([
    session.api.listNetworks(),
    session.api.listApps(),
  ]);
  shell.root.innerHTML = `
    <header class="bar">
      <strong>Contract Workbench</strong>
      <span>${escapeHtml(session.email)}</span>
    </header>
    <section class="card">
      <h2>Networks</h2>
      <ul>${networks
        .map(
          (n) => `<li><code>${escapeHtml(n.name)}</code> (${n.kind},
            chain ${n.chain_id})</li>`,
        )
        .join('')}</ul>
      <div class="row">
        <input data-role="net-name" placeholder="name">
        <input data-role="net-chain" placeholder="chain id" type="number">
        <select data-role="net-kind">
          <option value="mock">mock</option><option value="rpc">rpc</option>
        </select>
        <input data-role="net-url" placeholder="rpc url (rpc only)">
        <button data-role="net-add">Add network</button>
      </div>
    </section>
    <section class="card">
      <h2>Applications</h2>
      <ul data-role="apps">${apps
        .map(
          (a) => `<li><a href="#" data-app="${a.id}">${escapeHtml(a.name)}</a>
            — deployer <code>${a.deployer_address}</code></li>`,
        )
        .join('')}</ul>
      <div class="row">
        <input data-role="app-name" placeholder="application name">
        <select data-role="app-net">${networks
          .map((n) => `<option value="${n.id}">${escapeHtml(n.name)}</option>`)
          .join('')}</select>
        <button data-role="app-add">Create application</button>
      </div>
    </section>
    <p data-role="error" class="error" hidden></p>`;

  query<HTMLButtonElement>(shell.root, '[data-role="net-add"]').addEventListener(
    'click',
    () =>
      void (async () => {
        try {
          await session.api.addNetwork({
            name: query<HTMLInputElement>(shell.root, '[data-role="net-name"]').value,
            kind: query<HTMLSelectElement>(shell.root, '[data-role="net-kind"]')
              .value as 'mock' | 'rpc',
            chain_id: Number(
              query<HTMLInputElement>(shell.root, '[data-role="net-chain"]').value,
            ),
            rpc_url: query<HTMLInputElement>(shell.root, '[data-role="net-url"]').value,
          });
          await renderHome(shell);
        } catch (error) {
          showError(shell.root, error);
        }
      })(),
  );
  query<HTMLButtonElement>(shell.root, '[data-role="app-add"]').addEventListener(
    'click',
    () =>
      void (async () => {
        try {
          await session.api.createApp(
            query<HTMLInputElement>(shell.root, '[data-role="app-name"]').value,
            query<HTMLSelectElement>(shell.root, '[data-role="app-net"]').value,
          );
          await renderHome(shell);
        } catch (error) {
          showError(shell.root, error);
        }
      })(),
  );
  shell.root
    .querySelectorAll<HTMLAnchorElement>('[data-app]')
    .forEach((link) =>
      link.addEventListener('click', (event) => {
        event.preventDefault();
        void renderAppDashboard(shell, link.dataset.app as string);
      }),
    );
}

// -- application dashboard ---------------------------------------------------

export async function renderAppDashboard(
  shell: Shell,
  appId: string,
): Promise<void> {
  const session = shell.session;
  if (!session) return;
  const [app, contracts] = await Promise.all([
    session.api.getApp(appId),
    session.api.listContracts(appId),
  ]);
  shell.root.innerHTML = `
    <header class="bar">
      <a href="#" data-role="back">&larr; applications</a>
      <strong>${escapeHtml(app.name)}</strong>
      <span>deployer <code>${app.deployer_address}</code></span>
    </header>
    <section class="card">
      <h2>Contracts</h2>
      <ul>${contracts
        .map(
          (c) => `<li><a href="#" data-contract="${escapeHtml(c.name)}">
            ${escapeHtml(c.name)}</a> — v${c.active_version} active,
            ${c.versions} version(s)</li>`,
        )
        .join('')}</ul>
    </section>
    <section class="card">
      <h2>Deploy contract</h2>
      <div class="field"><label>Name</label><input data-role="dep-name"></div>
      <div class="field"><label>ABI (JSON array)</label>
        <textarea data-role="dep-abi" rows="4"></textarea></div>
      <div class="field"><label>Bytecode (0x-hex)</label>
        <textarea data-role="dep-code" rows="2"></textarea></div>
      <div class="field"><label>Constructor args (JSON array)</label>
        <input data-role="dep-args" value="[]"></div>
      <button data-role="dep-submit">Deploy</button>
      <p data-role="dep-result"></p>
    </section>
    <section class="card">
      <h2>Sharing</h2>
      <div class="row">
        <input data-role="share-email" placeholder="user email">
        <select data-role="share-role">
          <option>viewer</option><option>caller</option><option>editor</option>
        </select>
        <button data-role="share-submit">Share</button>
      </div>
    </section>
    <section class="card">
      <h2>API keys</h2>
      <ul data-role="keys"></ul>
      <div class="row">
        <input data-role="key-label" placeholder="label">
        <button data-role="key-create">Create key</button>
      </div>
      <p data-role="key-once" class="notice" hidden></p>
    </section>
    <p data-role="error" class="error" hidden></p>`;

  query<HTMLAnchorElement>(shell.root, '[data-role="back"]').addEventListener(
    'click', (event) => {
      event.preventDefault();
      void renderHome(shell);
    });

  const refreshKeys = async () => {
    try {
      const keys = await session.api.listKeys(appId);
      query<HTMLUListElement>(shell.root, '[data-role="keys"]').innerHTML = keys
        .map(
          (k) => `<li><code>${escapeHtml(k.label || k.id)}</code>
            hash ${k.key_hash.slice(0, 18)}…
            ${k.revoked ? '(revoked)' : `<button data-revoke="${k.id}">revoke</button>`}
          </li>`,
        )
        .join('');
      shell.root
        .querySelectorAll<HTMLButtonElement>('[data-revoke]')
        .forEach((button) =>
          button.addEventListener('click', () =>
            void session.api
              .revokeKey(appId, button.dataset.revoke as string)
              .then(refreshKeys),
          ),
        );
    } catch {
      // non-editors may not list keys; leave the section empty
    }
  };
  await refreshKeys();

  query<HTMLButtonElement>(shell.root, '[data-role="key-create"]')
    .addEventListener('click', () =>
      void (async () => {
        try {
          const created = await session.api.createKey(
            appId,
            query<HTMLInputElement>(shell.root, '[data-role="key-label"]').value,
          );
          // the plaintext token exists only in this message, shown once
          const once = query<HTMLParagraphElement>(
            shell.root, '[data-role="key-once"]');
          once.textContent =
            `API key (copy now, it is not shown again): ${created.token}`;
          once.hidden = false;
          await refreshKeys();
        } catch (error) {
          showError(shell.root, error);
        }
      })(),
    );

  query<HTMLButtonElement>(shell.root, '[data-role="share-submit"]')
    .addEventListener('click', () =>
      void session.api
        .shareApp(
          appId,
          query<HTMLInputElement>(shell.root, '[data-role="share-email"]').value,
          query<HTMLSelectElement>(shell.root, '[data-role="share-role"]').value,
        )
        .catch((error) => showError(shell.root, error)),
    );

  query<HTMLButtonElement>(shell.root, '[data-role="dep-submit"]')
    .addEventListener('click', () =>
      void (async () => {
        const name = query<HTMLInputElement>(
          shell.root, '[data-role="dep-name"]').value;
        const bytecode = query<HTMLTextAreaElement>(
          shell.root, '[data-role="dep-code"]').value.trim();
        const result = query<HTMLParagraphElement>(
          shell.root, '[data-role="dep-result"]');
        if (!bytecode) {
          result.textContent = 'bytecode is required';
          return;
        }
        try {
          const deployed = await session.api.deployContract(appId, {
            name,
            abi: query<HTMLTextAreaElement>(
              shell.root, '[data-role="dep-abi"]').value,
            bytecode,
            constructor_args: JSON.parse(
              query<HTMLInputElement>(
                shell.root, '[data-role="dep-args"]').value) as unknown[],
          });
          shell.activity.append({
            at: Date.now(), contract: name, kind: 'deploy',
            summary: `deployed v${deployed.version} at ${deployed.address}`,
            detail: `tx ${deployed.tx_hash}`,
          });
          result.textContent =
            `version ${deployed.version} at ${deployed.address} ` +
            `(tx ${deployed.tx_hash})`;
          await renderContract(shell, appId, name);
        } catch (error) {
          showError(shell.root, error);
        }
      })(),
    );

  shell.root
    .querySelectorAll<HTMLAnchorElement>('[data-contract]')
    .forEach((link) =>
      link.addEventListener('click', (event) => {
        event.preventDefault();
        void renderContract(shell, appId, link.dataset.contract as string);
      }),
    );
}

// -- contract view: generated method forms + history + activity ---------------

export async function renderContract(
  shell: Shell,
  appId: string,
  contract: string,
): Promise<void> {
  const session = shell.session;
  if (!session) return;
  const details: ContractDetails = await session.api.contractDetails(
    appId, contract);
  const forms = buildMethodForms(details);

  shell.root.innerHTML = `
    <header class="bar">
      <a href="#" data-role="back">&larr; ${escapeHtml(contract)} app</a>
      <strong>${escapeHtml(details.name)}</strong>
      <span>active v${details.active_version}</span>
    </header>
    <section class="card">
      <h2>Methods</h2>
      <div data-role="forms">${forms
        .map(
          (form, index) => `
        <form class="method" data-form="${index}">
          <h3><code>${escapeHtml(form.signature)}</code>
            <em>${form.mutability}</em></h3>
          ${form.inputs
            .map(
              (input, fieldIndex) => `
            <div class="field">
              <label>${escapeHtml(input.label)}</label>
              <input data-field="${fieldIndex}"
                     placeholder="${escapeHtml(input.placeholder)}"
                     ${form.supported ? '' : 'disabled'}>
              <span class="error" data-field-error="${fieldIndex}"></span>
            </div>`,
            )
            .join('')}
          ${
            form.supported
              ? `<button data-action="${form.action}">${
                  form.action === 'call' ? 'Call' : 'Invoke'
                }</button>`
              : `<p class="notice">${escapeHtml(form.notice ?? '')}</p>`
          }
          <pre data-result hidden></pre>
        </form>`,
        )
        .join('')}</div>
    </section>
    <section class="card">
      <h2>Versions</h2>
      <ul>${[...details.versions]
        .reverse()
        .map(
          (v) => `<li>v${v.version}${v.active ? ' <strong>(active)</strong>' : ''}
            <code>${v.address}</code> tx ${v.deploy_tx.slice(0, 18)}…</li>`,
        )
        .join('')}</ul>
      <p>accounts: ${details.accounts.map((a) => `<code>${a}</code>`).join(' ')}</p>
    </section>
    <section class="card">
      <h2>Activity</h2>
      <ul data-role="activity"></ul>
    </section>
    <p data-role="error" class="error" hidden></p>`;

  query<HTMLAnchorElement>(shell.root, '[data-role="back"]').addEventListener(
    'click', (event) => {
      event.preventDefault();
      void renderAppDashboard(shell, appId);
    });

  const refreshActivity = () => {
    query<HTMLUListElement>(shell.root, '[data-role="activity"]').innerHTML =
      shell.activity
        .forContract(contract)
        .map(
          (entry) => `<li>[${new Date(entry.at).toLocaleTimeString()}]
            <strong>${entry.kind}</strong> ${escapeHtml(entry.summary)}
            <small>${escapeHtml(entry.detail)}</small></li>`,
        )
        .join('');
  };
  refreshActivity();

  shell.root
    .querySelectorAll<HTMLFormElement>('[data-form]')
    .forEach((formElement) => {
      const form = forms[Number(formElement.dataset.form)];
      const button = formElement.querySelector<HTMLButtonElement>('[data-action]');
      if (!button) return;
      button.addEventListener('click', (event) => {
        event.preventDefault();
        void (async () => {
          const args: unknown[] = [];
          let valid = true;
          form.inputs.forEach((input, fieldIndex) => {
            const box = query<HTMLInputElement>(
              formElement, `[data-field="${fieldIndex}"]`);
            const errorSpan = query<HTMLElement>(
              formElement, `[data-field-error="${fieldIndex}"]`);
            const problem = validateValue(input.type, box.value);
            errorSpan.textContent = problem ?? '';
            if (problem) {
              valid = false;
            } else {
              args.push(toWireValue(input.type, box.value));
            }
          });
          if (!valid) return; // client-side validation blocks the request
          const resultBox = query<HTMLPreElement>(formElement, '[data-result]');
          try {
            if (form.action === 'call') {
              const response = await session.api.call(
                appId, contract, form.method, args);
              const rendered = response.outputs
                .map((output) => formatOutput(output.type, output.value))
                .join(', ');
              resultBox.textContent = rendered || '(no outputs)';
              shell.activity.append({
                at: Date.now(), contract, kind: 'call',
                summary: `${form.method}(${args.join(', ')}) -> ${rendered || '()'}`,
                detail: `version ${response.version_used}`,
              });
            } else {
              const response = await session.api.invoke(
                appId, contract, form.method, args);
              resultBox.textContent =
                `${response.receipt.status} in block ` +
                `${response.receipt.block_number} (tx ${response.tx_hash})`;
              shell.activity.append({
                at: Date.now(), contract, kind: 'invoke',
                summary: `${form.method}(${args.join(', ')}) -> ${response.receipt.status}`,
                detail: `tx ${response.tx_hash}`,
              });
            }
            resultBox.hidden = false;
            refreshActivity();
          } catch (error) {
            shell.activity.append({
              at: Date.now(), contract, kind: 'error',
              summary: `${form.method} failed`,
              detail: error instanceof ApiError
                ? `${error.code}: ${error.message}` : String(error),
            });
            refreshActivity();
            showError(shell.root, error);
          }
        })();
      });
    });
}
