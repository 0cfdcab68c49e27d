import { createShell } from './app.js';

const root = document.getElementById('root');
if (!root) {
  throw new Error('missing #root element');
}
// served from the workbench itself by default; override for remote use
const baseUrl =
  (window as { WORKBENCH_URL?: string }).WORKBENCH_URL ?? window.location.origin;
createShell(root, baseUrl);
